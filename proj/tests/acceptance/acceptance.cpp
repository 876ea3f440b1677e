// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit if any fails.
// --known-failure N keeps a documented failure out of the exit code; its line still reads [FAIL].
// The simulated dataset and the model trained on it are cached in --cache-dir,
// keyed by the circuit file contents, so repeated runs skip the recording.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "ofnav/ofnav.hpp"

namespace fs = std::filesystem;
using namespace ofnav;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path cache;
    std::string data_dir = OFNAV_DATA_DIR;
    std::optional<Dataset> dataset;
    std::optional<Classifier> model;
};

std::string fixed(double v, int digits = 2) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------
// 1, 2: metric and throughput formulas against the quoted reference figures

Outcome metric_reproduction(Context& ctx) {
    std::ifstream in(ctx.data_dir + "/reference_confusion.csv");
    const auto folds = read_confusion_csv(in);
    const auto s = summarize(folds);
    struct Expect {
        const char* name;
        const std::optional<MeanStd>& got;
        double mean, std;
    };
    const Expect expect[] = {{"precision", s.precision, 75.46, 6.21},
                             {"recall", s.recall, 61.71, 4.75},
                             {"F", s.f_measure, 68.00, 3.75},
                             {"accuracy", s.accuracy, 89.90, 1.36}};
    Outcome o{true, ""};
    for (const auto& e : expect) {
        const double m = 100.0 * e.got->mean, d = 100.0 * e.got->std;
        // quoted figures are rounded to 2 decimals
        o.pass = o.pass && std::abs(m - e.mean) <= 0.01 && std::abs(d - e.std) <= 0.01;
        o.detail += std::string(o.detail.empty() ? "" : ", ") + e.name + " " + fixed(m) + "±" + fixed(d);
        if (std::abs(m - e.mean) > 0.01 || std::abs(d - e.std) > 0.01)
            o.detail += " (quoted " + fixed(e.mean) + "±" + fixed(e.std) + ")";
    }
    return o;
}

Outcome throughput_formula(Context&) {
    const StageTimes quoted{50.50, 0.72, 15.97};
    const double fps = pipeline_fps(quoted);
    const double adjusted = capture_adjusted_fps(quoted, 25.28);
    return {std::abs(fps - 14.88) <= 0.01 && std::abs(adjusted - 9.4) <= 0.05,
            "fps " + fixed(fps, 3) + ", with 25.28 fps capture " + fixed(adjusted, 3)};
}

// ---------------------------------------------------------------------------
// 3: LK recovers known integer shifts

GrayImage noise_canvas(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    GrayImage img(w, h);
    for (auto& v : img.data()) v = u(rng);
    return gaussian3x3(gaussian3x3(img));
}

Outcome lk_oracle(Context&) {
    constexpr int w = 320, h = 240, margin = 8;
    const LkParams params;  // 31x31, 3 levels, 10 iterations, eps 0.03
    const auto points = project_distribution(make_ring_distribution(RingParams{}), w, h, 0.8);
    std::size_t tracked = 0, good = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const GrayImage canvas = noise_canvas(w + 2 * margin, h + 2 * margin, seed);
        auto crop = [&](int dx, int dy) {
            GrayImage out(w, h);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) out.at(x, y) = canvas.at(x + margin - dx, y + margin - dy);
            return out;
        };
        const GrayImage base = crop(0, 0);
        for (int dy = -4; dy <= 4; ++dy)
            for (int dx = -4; dx <= 4; ++dx) {
                const FlowField f = lk_track(base, crop(dx, dy), points, params);
                for (std::size_t i = 0; i < f.size(); ++i) {
                    if (!f.tracked(i)) continue;
                    ++tracked;
                    good += std::hypot(f.u[i].x - dx, f.u[i].y - dy) <= 0.25;
                }
            }
    }
    const double rate = tracked ? static_cast<double>(good) / static_cast<double>(tracked) : 0.0;
    return {rate >= 0.95, fixed(100.0 * rate) + "% of " + std::to_string(tracked) + " tracked points within 0.25 px"};
}

// ---------------------------------------------------------------------------
// 4: PCA properties

Outcome pca_properties(Context&) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<std::vector<double>> x(300, std::vector<double>(20));
    for (auto& row : x)
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = 5.0 + g(rng) * 10.0 / static_cast<double>(j + 1);
    // correlate a few columns so the axes are not the coordinate axes
    for (auto& row : x) {
        row[3] += 0.8 * row[0];
        row[7] -= 0.5 * row[1];
    }
    const PcaModel m = pca_fit(x, 0.9);

    double ortho = 0.0;
    for (std::size_t a = 0; a < m.rank(); ++a)
        for (std::size_t b = 0; b < m.rank(); ++b) {
            double dot = 0.0;
            for (std::size_t j = 0; j < m.dim(); ++j) dot += m.component(a)[j] * m.component(b)[j];
            ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    double kept = 0.0;
    for (std::size_t r = 0; r < m.rank(); ++r) kept += m.eigenvalues[r];
    const double ratio = kept / m.total_variance;
    double mean_proj = 0.0;
    for (double v : pca_project(m, m.mean)) mean_proj = std::max(mean_proj, std::abs(v));

    std::vector<std::vector<double>> line;
    for (int i = 0; i < 50; ++i) {
        const double t = g(rng);
        line.push_back({1.0 + 2.0 * t, -3.0 - t, 0.5 * t, 4.0});
    }
    const std::size_t line_rank = pca_fit(line, 0.9).rank();

    const bool pass = ortho <= 1e-8 && ratio >= 0.9 && mean_proj <= 1e-10 && line_rank == 1;
    return {pass, "orthonormality error " + fixed(ortho * 1e12, 3) + "e-12, retained " + fixed(ratio, 4) + " at rank " +
                      std::to_string(m.rank()) + ", |P(mean)| " + fixed(mean_proj * 1e12, 3) + "e-12, rank-1 data -> " +
                      std::to_string(line_rank)};
}

// ---------------------------------------------------------------------------
// 5: SMO against an exhaustive active-set oracle

// min 0.5 a'Qa - sum a  s.t. y'a = 0, 0 <= a_i <= ub_i: every assignment of each
// variable to {lower, upper, free} is solved via its KKT system; the best feasible wins.
double exhaustive_dual_minimum(const Eigen::MatrixXd& q, const Eigen::VectorXd& y, const Eigen::VectorXd& ub) {
    const int n = static_cast<int>(y.size());
    int combos = 1;
    for (int i = 0; i < n; ++i) combos *= 3;
    double best = std::numeric_limits<double>::infinity();
    for (int code = 0; code < combos; ++code) {
        std::vector<int> state(static_cast<std::size_t>(n));
        for (int i = 0, c = code; i < n; ++i, c /= 3) state[static_cast<std::size_t>(i)] = c % 3;
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        std::vector<int> free;
        for (int i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] == 1) a(i) = ub(i);
            if (state[static_cast<std::size_t>(i)] == 2) free.push_back(i);
        }
        const int f = static_cast<int>(free.size());
        if (f > 0) {
            Eigen::MatrixXd k = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd rhs(f + 1);
            for (int r = 0; r < f; ++r) {
                for (int c = 0; c < f; ++c) k(r, c) = q(free[r], free[c]);
                k(r, f) = k(f, r) = y(free[r]);
                rhs(r) = 1.0 - q.row(free[r]).dot(a);
            }
            rhs(f) = -y.dot(a);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
            if (!lu.isInvertible()) continue;
            const Eigen::VectorXd sol = lu.solve(rhs);
            for (int r = 0; r < f; ++r) a(free[r]) = sol(r);
        }
        if (std::abs(y.dot(a)) > 1e-9) continue;
        bool feasible = true;
        for (int i = 0; i < n; ++i) feasible = feasible && a(i) >= -1e-12 && a(i) <= ub(i) + 1e-12;
        if (!feasible) continue;
        best = std::min(best, 0.5 * a.dot(q * a) - a.sum());
    }
    return best;
}

struct DualCheck {
    double objective_gap = 0.0;
    double box_violation = 0.0;
    double equality_violation = 0.0;
};

DualCheck check_svm(const std::vector<std::vector<double>>& x, const std::vector<Label>& y, double c, double gamma,
                    const ClassWeights& w, bool* all_correct) {
    SvmTrainStats st;
    SmoOptions opt;
    opt.tolerance = 1e-6;
    const SvmModel m = svm_train(x, y, c, gamma, w, opt, &st);
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd q(n, n);
    Eigen::VectorXd yy(n), ub(n);
    for (int i = 0; i < n; ++i) {
        yy(i) = to_int(y[static_cast<std::size_t>(i)]);
        ub(i) = c * w.of(y[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q(i, j) = yy(i) * yy(j) * rbf_kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], gamma);
    DualCheck d;
    d.objective_gap = std::abs(st.dual_objective + exhaustive_dual_minimum(q, yy, ub));
    double eq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = st.alpha[static_cast<std::size_t>(i)];
        d.box_violation = std::max({d.box_violation, -a, a - ub(i)});
        eq += a * yy(i);
    }
    d.equality_violation = std::abs(eq);
    if (all_correct) {
        *all_correct = true;
        for (int i = 0; i < n; ++i) *all_correct = *all_correct && m.predict(x[static_cast<std::size_t>(i)]) == y[static_cast<std::size_t>(i)];
    }
    return d;
}

Outcome svm_oracle(Context&) {
    const std::vector<std::vector<double>> xor_x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const std::vector<Label> xor_y{Label::Positive, Label::Positive, Label::Negative, Label::Negative};
    bool correct = false;
    const DualCheck xr = check_svm(xor_x, xor_y, 100.0, 1.0, {1.0, 1.0}, &correct);

    // further instances, including unbalanced class weights, for the constraint checks
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_gap = 0.0, worst_box = xr.box_violation, worst_eq = xr.equality_violation;
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<std::vector<double>> x;
        std::vector<Label> y;
        for (int i = 0; i < 7; ++i) {
            x.push_back({u(rng), u(rng), u(rng)});
            y.push_back(i < 2 ? Label::Positive : Label::Negative);
        }
        const DualCheck d = check_svm(x, y, rep % 2 ? 0.3 : 20.0, 1.5, balanced_weights(y), nullptr);
        worst_gap = std::max(worst_gap, d.objective_gap);
        worst_box = std::max(worst_box, d.box_violation);
        worst_eq = std::max(worst_eq, d.equality_violation);
    }
    const bool pass = xr.objective_gap <= 1e-3 && correct && worst_gap <= 1e-3 && worst_box <= 1e-9 && worst_eq <= 1e-9;
    return {pass, "XOR dual gap " + fixed(xr.objective_gap * 1e6, 3) + "e-6, " + (correct ? "4/4" : "not all") +
                      " correct; 8 random instances: gap <= " + fixed(worst_gap * 1e6, 3) + "e-6, box " +
                      fixed(worst_box * 1e12, 3) + "e-12, sum(a y) " + fixed(worst_eq * 1e12, 3) + "e-12"};
}

// ---------------------------------------------------------------------------
// 6, 7: simulated dataset, cross-validation, closed loop

const Dataset& dataset(Context& ctx) {
    if (ctx.dataset) return *ctx.dataset;
    const std::string scene_path = ctx.data_dir + "/circuit.json";
    const std::string key = std::to_string(std::hash<std::string>{}(read_text(scene_path) + "|recorder-v4"));
    const fs::path csv = ctx.cache / "dataset.csv", manifest = ctx.cache / "dataset.manifest.csv",
                   keyfile = ctx.cache / "dataset.key";
    if (fs::exists(csv) && fs::exists(manifest) && fs::exists(keyfile) && read_text(keyfile.string()) == key) {
        Dataset ds = load_dataset(csv.string());
        ds.recording = expand_manifest(load_manifest(manifest.string()), ds.size());
        ctx.dataset = std::move(ds);
        std::cout << "  (dataset loaded from " << csv.string() << ")\n";
        return *ctx.dataset;
    }
    const auto file = sim::load_scene(scene_path);
    sim::RecorderOptions opt;
    ctx.dataset = sim::record_dataset(file.scene, *file.circuit, opt);
    fs::create_directories(ctx.cache);
    save_dataset(csv.string(), *ctx.dataset);
    save_manifest(manifest.string(), make_manifest(ctx.dataset->recording));
    fs::remove(ctx.cache / "model.json");
    std::ofstream(keyfile) << key;
    return *ctx.dataset;
}

const Classifier& model(Context& ctx) {
    if (ctx.model) return *ctx.model;
    const Dataset& ds = dataset(ctx);
    const fs::path path = ctx.cache / "model.json";
    if (fs::exists(path) && fs::last_write_time(path) >= fs::last_write_time(ctx.cache / "dataset.csv")) {
        ctx.model = load_classifier(path.string());
    } else {
        ctx.model = train_classifier(ds.samples, PipelineConfig{});
        save_classifier(path.string(), *ctx.model);
    }
    return *ctx.model;
}

Outcome end_to_end(Context& ctx) {
    const Dataset& ds = dataset(ctx);
    PipelineConfig svm_cfg;  // normalize -> PCA(0.9) -> balanced RBF-SVM, grouped 8-fold
    PipelineConfig perc_cfg = svm_cfg;
    perc_cfg.learner.kind = LearnerKind::Perceptron;
    const auto svm = crossval(ds, svm_cfg);
    const auto perc = crossval(ds, perc_cfg);
    const double majority = static_cast<double>(std::max(ds.count(Label::Positive), ds.count(Label::Negative))) /
                            static_cast<double>(ds.size());
    const double acc = svm.summary.accuracy ? svm.summary.accuracy->mean : 0.0;
    const double f = svm.summary.f_measure ? svm.summary.f_measure->mean : 0.0;
    const double pf = perc.summary.f_measure ? perc.summary.f_measure->mean : 0.0;
    return {acc > majority && f > 0.5 && pf < f,
            std::to_string(ds.size()) + " samples (" + std::to_string(ds.count(Label::Positive)) +
                " positive); SVM accuracy " + fixed(100 * acc) + " vs majority " + fixed(100 * majority) + ", F " +
                fixed(100 * f) + "; perceptron F " + fixed(100 * pf)};
}

// Seed 0 runs the course as written; other seeds re-texture every surface and nudge the start pose.
sim::SceneFile perturbed(const sim::SceneFile& base, int seed) {
    sim::SceneFile f = base;
    if (seed == 0) return f;
    const auto s = static_cast<std::uint64_t>(seed);
    for (auto& o : f.scene.obstacles) o.seed += 1000 * s;
    f.scene.floor_seed += s;
    f.scene.backdrop_seed += s;
    f.start->y += 0.02 * ((seed % 3) - 1);
    f.start->heading += seed % 2 ? 0.015 : -0.015;
    return f;
}

Outcome closed_loop(Context& ctx) {
    const Classifier& clf = model(ctx);
    const auto base = sim::load_scene(ctx.data_dir + "/online.json");
    Outcome o{true, ""};
    for (int seed = 0; seed < 5; ++seed) {
        const auto f = perturbed(base, seed);
        const auto run = sim::run_closed_loop(f.scene, *f.start, clf);
        const auto v = sim::assess_course(f, run);
        o.pass = o.pass && v.completed();
        std::string seq;
        for (const auto& e : v.episodes) seq += e.kind == SteerKind::EvadeLeft ? 'L' : 'R';
        o.detail += (o.detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + ": " +
                    (seq.empty() ? "-" : seq) + " " + std::to_string(run.evades.size()) + " evades, " +
                    std::to_string(run.collisions) + " collisions" + (v.passed_last ? "" : ", unfinished");
    }
    return o;
}

// ---------------------------------------------------------------------------
// 8: label rule and policy invariants

FlowField synthetic_flow(double left_mag, double right_mag) {
    FlowField f;
    for (int k = 0; k < 10; ++k) {
        const double y = 20.0 + 20.0 * k;
        f.points.push_back({40.0 + 10 * k, y});
        f.u.push_back({left_mag * 0.6, left_mag * 0.8});
        f.status.push_back(TrackStatus::Tracked);
        f.points.push_back({200.0 + 10 * k, y});
        f.u.push_back({-right_mag * 0.8, right_mag * 0.6});
        f.status.push_back(TrackStatus::Tracked);
    }
    return f;
}

FlowField scaled(FlowField f, double s) {
    for (auto& u : f.u) u = {u.x * s, u.y * s};
    return f;
}

Outcome invariants(Context&) {
    std::vector<std::string> failed;
    auto check = [&](bool ok, const char* what) {
        if (!ok) failed.push_back(what);
    };
    check(label_from_range(10.0) == Label::Positive && label_from_range(70.0) == Label::Positive,
          "boundaries inclusive");
    check(label_from_range(std::nextafter(10.0, 0.0)) == Label::Negative &&
              label_from_range(std::nextafter(70.0, 100.0)) == Label::Negative,
          "step just outside");

    const auto busy_left = synthetic_flow(3.0, 1.0), busy_right = synthetic_flow(1.0, 3.0);
    for (double s : {1e-3, 0.5, 7.0, 1e3}) {
        check(decide(scaled(busy_left, s), Label::Positive, 320).kind == SteerKind::EvadeRight, "scale invariance");
        check(decide(scaled(busy_right, s), Label::Positive, 320).kind == SteerKind::EvadeLeft, "scale invariance");
    }
    check(decide(synthetic_flow(2.0, 2.0), Label::Positive, 320).kind == SteerKind::EvadeRight, "tie-break");
    check(decide(busy_left, Label::Negative, 320).kind == SteerKind::Straight, "negative goes straight");

    const VelocityCommand cmds[] = {cruise_command(), evade_command(SteerKind::EvadeRight),
                                    evade_command(SteerKind::EvadeLeft)};
    for (const auto& c : cmds) {
        const auto v = velocity_components(c);
        check(v.linear * v.linear + v.angular * v.angular == c.magnitude_pct * c.magnitude_pct, "velocity identity");
    }
    const WheelState cruise = apply_command(cruise_command());
    const WheelState right = apply_command(evade_command(SteerKind::EvadeRight));
    const WheelState left = apply_command(evade_command(SteerKind::EvadeLeft));
    check(cruise.left_duty == 50.0 && cruise.right_duty == 50.0 && cruise.left_dir == WheelDir::Forward &&
              cruise.right_dir == WheelDir::Forward,
          "cruise wheels");
    check(right.left_duty == 60.0 && right.right_duty == 0.0, "evade right wheels");
    check(left.left_duty == 0.0 && left.right_duty == 60.0, "evade left wheels");
    check(decide(busy_left, Label::Positive, 320).duration_ms == 200.0, "evade duration");

    std::string detail = failed.empty() ? "label steps, decide scale/tie, velocity identity, wheel states" : "failed:";
    for (const auto& f : failed) detail += " " + f + ";";
    return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    ctx.cache = fs::temp_directory_path() / "ofnav_acceptance";
    std::vector<int> only, known;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--cache-dir" && i + 1 < argc) ctx.cache = argv[++i];
        else if (a == "--only" && i + 1 < argc) only.push_back(std::stoi(argv[++i]));
        else if (a == "--known-failure" && i + 1 < argc) known.push_back(std::stoi(argv[++i]));
        else {
            std::cerr << "usage: acceptance [--cache-dir DIR] [--only N]... [--known-failure N]...\n";
            return 2;
        }
    }

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome(Context&)> run;
    };
    const Criterion criteria[] = {
        {1, "metric reproduction", 1.0, metric_reproduction},
        {2, "throughput formula", 1.0, throughput_formula},
        {3, "LK shift oracle", 30.0, lk_oracle},
        {4, "PCA properties", 10.0, pca_properties},
        {5, "SVM dual oracle", 10.0, svm_oracle},
        {6, "end-to-end classification", 600.0, end_to_end},
        {7, "closed-loop navigation", 300.0, closed_loop},
        {8, "label rule and policy invariants", 1.0, invariants},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        if (!in_time) o.detail += " (over the " + fixed(c.budget_s, 0) + " s budget)";
        const bool pass = o.pass && in_time;
        const bool excused = std::find(known.begin(), known.end(), c.id) != known.end();
        failures += !pass && !excused;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << o.detail << " [" << fixed(secs)
                  << " s]" << (!pass && excused ? " (known failure)" : "") << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
