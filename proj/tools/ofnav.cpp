// ofnav: command-line front end. Summaries go to stdout; files are only written to explicit paths.
// Exit codes: 0 ok, 2 usage, 3 data format, 4 numeric failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ofnav/ofnav.hpp"

namespace fs = std::filesystem;
using namespace ofnav;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Flags shared by every command that builds a PipelineConfig. Unset flags keep the file or default value.
struct ConfigFlags {
    std::string path;
    std::optional<std::string> learner;
    std::optional<double> c, gamma;
    std::optional<int> k;
    std::optional<std::string> fold_mode;
    bool grouped = false;
    std::optional<std::uint64_t> seed;

    void add(CLI::App* cmd, bool folds) {
        cmd->add_option("--config", path, "Pipeline config JSON")->check(CLI::ExistingFile);
        cmd->add_option("--learner", learner, "svm | perceptron | svr");
        cmd->add_option("--C", c, "Soft-margin / penalty constant");
        cmd->add_option("--gamma", gamma, "RBF width; <= 0 selects the scale heuristic");
        cmd->add_option("--seed", seed, "Seed for shuffled folds");
        if (folds) {
            cmd->add_option("--k", k, "Number of folds");
            cmd->add_option("--fold-mode", fold_mode, "contiguous | grouped | shuffled");
            cmd->add_flag("--grouped", grouped, "Shorthand for --fold-mode grouped");
        }
    }

    PipelineConfig build() const {
        PipelineConfig cfg = path.empty() ? PipelineConfig{} : load_config(path);
        if (learner) cfg.learner.kind = learner_from_string(*learner);
        if (c) cfg.learner.c = *c;
        if (gamma) cfg.learner.gamma = *gamma;
        if (k) cfg.k = *k;
        if (fold_mode) cfg.fold_mode = fold_mode_from_string(*fold_mode);
        if (grouped) cfg.fold_mode = FoldMode::Grouped;
        if (seed) cfg.seed = *seed;
        cfg.validate();
        return cfg;
    }
};

std::string default_manifest(const std::string& dataset) {
    fs::path p(dataset);
    return (p.parent_path() / (p.stem().string() + ".manifest.csv")).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    return out;
}

// ---------------------------------------------------------------------------

int gen_points(int rings, int per_ring, double growth, const std::string& out) {
    if (per_ring < 1 || rings < 0 || !(growth > 1.0)) fail(ErrorKind::InvalidArgument, "gen-points: need rings >= 0, per-ring >= 1, growth > 1");
    const auto d = make_ring_distribution(rings, per_ring, growth);
    save_distribution(out, d);
    std::cout << d.points.size() << " points written to " << out << '\n';
    return 0;
}

struct GenDatasetArgs {
    std::string scene, out, manifest;
    std::optional<int> laps, recordings;
    std::uint64_t seed = 0;
};

int gen_dataset(const GenDatasetArgs& a, const ConfigFlags& cf) {
    const auto file = sim::load_scene(a.scene);
    if (!file.circuit) fail(ErrorKind::DataFormat, a.scene + ": scene has no circuit section");
    sim::CircuitSpec c = *file.circuit;
    if (a.laps) c.laps = *a.laps;
    if (a.recordings) c.recordings = *a.recordings;
    sim::RecorderOptions opt;
    opt.pipeline = cf.build();
    opt.seed = a.seed;

    std::vector<sim::RecordingStats> stats;
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset ds = sim::record_dataset(file.scene, c, opt, &stats);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    save_dataset(a.out, ds);
    const std::string manifest = a.manifest.empty() ? default_manifest(a.out) : a.manifest;
    save_manifest(manifest, make_manifest(ds.recording));

    std::cout << "recording  samples  positives  collisions\n";
    for (std::size_t r = 0; r < stats.size(); ++r) {
        std::cout << std::setw(9) << r + 1 << std::setw(9) << stats[r].samples << std::setw(11) << stats[r].positives
                  << std::setw(12) << stats[r].collisions << '\n';
    }
    std::cout << ds.size() << " samples (" << ds.count(Label::Positive) << " positive, " << ds.count(Label::Negative)
              << " negative) in " << stats.size() << " recordings, " << std::fixed << std::setprecision(1)
              << dt.count() << " s\n";
    std::cout << "dataset:  " << a.out << "\nmanifest: " << manifest << '\n';
    return 0;
}

int train(const std::string& data, const std::string& out, const ConfigFlags& cf) {
    const PipelineConfig cfg = cf.build();
    const Dataset ds = load_dataset(data);
    TrainReport rep;
    const Classifier clf = train_classifier(ds.samples, cfg, &rep);
    save_classifier(out, clf);
    std::cout << "learner " << to_string(cfg.learner.kind) << ", " << rep.samples << " samples, PCA rank "
              << rep.pca_rank << ", gamma " << rep.gamma << ", " << rep.support_vectors << " support vectors, "
              << rep.iterations << " iterations\nmodel: " << out << '\n';
    return 0;
}

struct CrossvalArgs {
    std::string data, manifest, report, confusion;
    unsigned jobs = 1;
};

int crossval_cmd(const CrossvalArgs& a, const ConfigFlags& cf) {
    const PipelineConfig cfg = cf.build();
    Dataset ds = load_dataset(a.data);
    std::string manifest = a.manifest;
    if (manifest.empty() && fs::exists(default_manifest(a.data))) manifest = default_manifest(a.data);
    if (!manifest.empty()) ds.recording = expand_manifest(load_manifest(manifest), ds.size());
    if (cfg.fold_mode == FoldMode::Grouped && ds.recording.empty()) {
        fail(ErrorKind::InvalidArgument, "crossval: grouped folds need a recordings manifest (--manifest)");
    }

    CrossvalOptions opt;
    opt.jobs = a.jobs;
    const CrossvalResult res = crossval(ds, cfg, opt);

    std::cout << to_string(cfg.learner.kind) << ", " << res.folds.size() << " " << to_string(cfg.fold_mode)
              << " folds over " << ds.size() << " samples\n";
    std::cout << "fold     tp     fp     tn     fn  rank\n";
    for (const auto& f : res.folds) {
        const auto& c = f.confusion;
        std::cout << std::setw(4) << f.fold_index + 1 << std::setw(7) << c.tp << std::setw(7) << c.fp << std::setw(7)
                  << c.tn << std::setw(7) << c.fn << std::setw(6) << f.pca_rank << '\n';
    }
    write_summary(std::cout, res.summary);
    const double majority = static_cast<double>(std::max(ds.count(Label::Positive), ds.count(Label::Negative))) /
                            static_cast<double>(ds.size());
    std::cout << "majority  " << std::fixed << std::setprecision(2) << 100.0 * majority << '\n';

    if (!a.report.empty()) {
        auto out = open_out(a.report);
        write_fold_reports(out, res.folds);
    }
    if (!a.confusion.empty()) {
        std::vector<ConfusionMatrix> cms;
        for (const auto& f : res.folds) cms.push_back(f.confusion);
        auto out = open_out(a.confusion);
        write_confusion_csv(out, cms);
    }
    return 0;
}

struct SimulateArgs {
    std::string scene, model, trajectory, decisions, frames;
    std::optional<int> steps;
    std::uint64_t seed = 0;
    double noise = 0.0;
};

int simulate(const SimulateArgs& a) {
    const auto file = sim::load_scene(a.scene);
    if (!file.start) fail(ErrorKind::DataFormat, a.scene + ": scene has no start pose");
    const Classifier model = load_classifier(a.model);
    sim::ClosedLoopOptions opt;
    if (a.steps) opt.max_steps = *a.steps;
    opt.noise_seed = a.seed;
    opt.camera.noise_sigma = a.noise;
    if (!a.frames.empty()) {
        fs::create_directories(a.frames);
        opt.on_frame = [&](int step, const GrayImage& frame) {
            std::ostringstream name;
            name << "frame_" << std::setw(5) << std::setfill('0') << step << ".pgm";
            pnm::save_pgm((fs::path(a.frames) / name.str()).string(), frame);
        };
    }
    const auto res = sim::run_closed_loop(file.scene, *file.start, model, opt);
    const auto verdict = sim::assess_course(file, res);

    std::cout << "termination " << to_string(res.termination) << " after " << res.trajectory.size() << " steps\n"
              << "collisions  " << res.collisions << "\nevades      " << res.evades.size() << '\n';
    for (const auto& e : res.evades) {
        std::cout << "  tick " << std::setw(4) << e.tick << "  " << std::setw(11) << to_string(e.kind);
        if (e.nearest_obstacle) std::cout << "  obstacle " << *e.nearest_obstacle << " at " << std::fixed << std::setprecision(2) << e.nearest_distance << " m";
        std::cout << '\n';
    }
    std::cout << "episodes   ";
    for (const auto& ep : verdict.episodes) std::cout << ' ' << ep.obstacle << ':' << to_string(ep.kind);
    std::cout << "\ncourse      " << (verdict.completed() ? "completed" : "not completed") << '\n';

    if (!a.trajectory.empty()) {
        auto out = open_out(a.trajectory);
        sim::write_trajectory(out, res);
    }
    if (!a.decisions.empty()) {
        auto out = open_out(a.decisions);
        sim::write_decision_log(out, res);
    }
    return 0;
}

ColorImage load_any(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic == "P5") {
        const GrayImage g = pnm::load_pgm(path);
        ColorImage c(g.width(), g.height());
        for (int y = 0; y < g.height(); ++y)
            for (int x = 0; x < g.width(); ++x) {
                const auto v = to_u8(g.at(x, y));
                c.at(x, y) = {v, v, v};
            }
        return c;
    }
    return pnm::load_ppm(path);
}

// Flow vectors drawn over the grey frame: green for tracked points, red crosses for lost ones.
ColorImage draw_flow(const GrayImage& base, const FlowField& f, double scale) {
    ColorImage img(base.width(), base.height());
    for (int y = 0; y < base.height(); ++y)
        for (int x = 0; x < base.width(); ++x) {
            const auto v = static_cast<std::uint8_t>(to_u8(base.at(x, y)) / 2);
            img.at(x, y) = {v, v, v};
        }
    auto plot = [&](double x, double y, Rgb c) {
        const int ix = static_cast<int>(std::lround(x)), iy = static_cast<int>(std::lround(y));
        if (ix >= 0 && iy >= 0 && ix < img.width() && iy < img.height()) img.at(ix, iy) = c;
    };
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto p = f.points[i];
        if (!f.tracked(i)) {
            for (int d = -2; d <= 2; ++d) {
                plot(p.x + d, p.y + d, {255, 0, 0});
                plot(p.x + d, p.y - d, {255, 0, 0});
            }
            continue;
        }
        const double dx = scale * f.u[i].x, dy = scale * f.u[i].y;
        const int n = std::max(1, static_cast<int>(std::ceil(std::hypot(dx, dy))));
        for (int s = 0; s <= n; ++s) plot(p.x + dx * s / n, p.y + dy * s / n, {0, 255, 0});
        plot(p.x, p.y, {255, 255, 0});
    }
    return img;
}

int flow_cmd(const std::string& prev, const std::string& next, const std::string& out, const std::string& csv,
             double scale, const ConfigFlags& cf) {
    const PipelineConfig cfg = cf.build();
    const GrayImage a = to_grayscale(load_any(prev));
    const GrayImage b = to_grayscale(load_any(next));
    if (a.width() != b.width() || a.height() != b.height()) fail(ErrorKind::InvalidArgument, "flow: frame sizes differ");
    const FlowExtractor fx(cfg, a.width(), a.height());
    const FlowField f = fx.track(fx.prepare(a), fx.prepare(b));

    std::size_t tracked = 0;
    double mean = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!f.tracked(i)) continue;
        ++tracked;
        mean += std::hypot(f.u[i].x, f.u[i].y);
    }
    const HalfMeans hm = half_means(f, a.width());
    std::cout << tracked << '/' << f.size() << " points tracked, mean |u| " << std::fixed << std::setprecision(3)
              << (tracked ? mean / static_cast<double>(tracked) : 0.0) << " px, left " << hm.left << ", right "
              << hm.right << '\n';
    if (!out.empty()) pnm::save_ppm(out, draw_flow(b, f, scale));
    if (!csv.empty()) {
        auto o = open_out(csv);
        o << "x,y,u,v,tracked\n";
        for (std::size_t i = 0; i < f.size(); ++i) {
            o << detail::format_double(f.points[i].x) << ',' << detail::format_double(f.points[i].y) << ','
              << detail::format_double(f.u[i].x) << ',' << detail::format_double(f.u[i].y) << ',' << (f.tracked(i) ? 1 : 0)
              << '\n';
        }
    }
    return 0;
}

struct BenchArgs {
    std::string model, scene;
    std::vector<double> times;
    std::size_t reps = 20;
    double capture_fps = 25.28;
};

void print_times(const StageTimes& t, double capture_fps) {
    std::cout << std::fixed << std::setprecision(2) << "t_op   " << std::setw(8) << t.t_op << " ms\n"
              << "t_pca  " << std::setw(8) << t.t_pca << " ms\n"
              << "t_svm  " << std::setw(8) << t.t_svm << " ms\n"
              << "total  " << std::setw(8) << t.total() << " ms\n"
              << "fps    " << std::setw(8) << pipeline_fps(t) << '\n'
              << "fps with capture at " << capture_fps << ": " << capture_adjusted_fps(t, capture_fps) << '\n';
}

int bench(const BenchArgs& a) {
    if (!a.times.empty()) {
        if (a.times.size() != 3) fail(ErrorKind::InvalidArgument, "bench: --times takes t_op,t_pca,t_svm");
        print_times({a.times[0], a.times[1], a.times[2]}, a.capture_fps);
        return 0;
    }
    if (a.model.empty()) fail(ErrorKind::InvalidArgument, "bench: need --model (or --times)");
    const Classifier model = load_classifier(a.model);
    sim::Scene scene;
    RobotPose pose{0.0, 0.0, 0.0};
    if (!a.scene.empty()) {
        const auto f = sim::load_scene(a.scene);
        scene = f.scene;
        if (f.start) pose = *f.start;
    } else {
        scene.obstacles.push_back({0.9, 0.05, std::numbers::pi, 0.5, 0.35, 1});
    }
    const sim::CameraModel cam;
    const GrayImage f0 = sim::render(scene, pose, cam);
    const GrayImage f1 = sim::render(scene, drive_kinematics(apply_command(cruise_command()), pose, 0.1, {}), cam);
    const FlowExtractor fx(model.config(), cam.width, cam.height);

    // t_op covers both frames' conditioning, LK and feature extraction
    FeatureVector fv;
    StageTimes t;
    t.t_op = time_stage([&] { fv = flow_to_feature(fx.track(fx.prepare(f0), fx.prepare(f1))); }, a.reps);
    std::vector<double> z;
    t.t_pca = time_stage([&] { z = model.project(model.condition(fv)); }, a.reps * 50);
    Label p = Label::Negative;
    t.t_svm = time_stage([&] { p = model.predict_projected(z); }, a.reps * 50);
    std::cout << cam.width << 'x' << cam.height << " frames, " << a.reps << " repetitions, prediction "
              << to_int(p) << '\n';
    print_times(t, a.capture_fps);
    return 0;
}

int metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    const auto folds = read_confusion_csv(in);
    ConfusionMatrix total;
    for (const auto& c : folds) total += c;
    std::cout << folds.size() << " folds, " << total.total() << " samples (" << total.tp + total.fn << " positive)\n";
    write_summary(std::cout, summarize(folds));
    return 0;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return kExitUsage;
        case ErrorKind::DataFormat: return kExitData;
        case ErrorKind::Numeric:
        case ErrorKind::UndefinedMetric: return kExitNumeric;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optical-flow obstacle detection and avoidance toolkit"};
    app.require_subcommand(1);
    int result = 0;

    {
        auto* cmd = app.add_subcommand("gen-points", "Write the ring sampling distribution");
        static int rings = 5, per_ring = 20;
        static double growth = 2.0;
        static std::string out;
        cmd->add_option("--rings", rings, "Number of rings")->capture_default_str();
        cmd->add_option("--per-ring", per_ring, "Points per ring")->capture_default_str();
        cmd->add_option("--growth", growth, "Radius ratio between consecutive rings")->capture_default_str();
        cmd->add_option("--out", out, "Output file")->required();
        cmd->callback([&] { result = gen_points(rings, per_ring, growth, out); });
    }
    {
        auto* cmd = app.add_subcommand("gen-dataset", "Record a labelled dataset on a simulated circuit");
        static GenDatasetArgs a;
        static ConfigFlags cf;
        cmd->add_option("--scene", a.scene, "Scene JSON with a circuit section")->required();
        cmd->add_option("--out", a.out, "Dataset CSV")->required();
        cmd->add_option("--manifest", a.manifest, "Recordings manifest (default: <out>.manifest.csv)");
        cmd->add_option("--laps", a.laps, "Override laps per recording");
        cmd->add_option("--recordings", a.recordings, "Override recording count");
        cmd->add_option("--seed", a.seed, "Pilot jitter seed")->capture_default_str();
        cmd->add_option("--config", cf.path, "Pipeline config JSON")->check(CLI::ExistingFile);
        cmd->callback([&] { result = gen_dataset(a, cf); });
    }
    {
        auto* cmd = app.add_subcommand("train", "Fit the classifier on a whole dataset");
        static std::string data, out;
        static ConfigFlags cf;
        cmd->add_option("--data", data, "Dataset CSV")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out, "Model JSON")->required();
        cf.add(cmd, false);
        cmd->callback([&] { result = train(data, out, cf); });
    }
    {
        auto* cmd = app.add_subcommand("crossval", "k-fold cross-validation");
        static CrossvalArgs a;
        static ConfigFlags cf;
        cmd->add_option("--data", a.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
        cmd->add_option("--manifest", a.manifest, "Recordings manifest (default: <data>.manifest.csv if present)");
        cmd->add_option("--report", a.report, "Per-fold report CSV");
        cmd->add_option("--confusion", a.confusion, "Per-fold confusion CSV");
        cmd->add_option("--jobs", a.jobs, "Folds trained in parallel")->capture_default_str();
        cf.add(cmd, true);
        cmd->callback([&] { result = crossval_cmd(a, cf); });
    }
    {
        auto* cmd = app.add_subcommand("simulate", "Autonomous run with a trained model");
        static SimulateArgs a;
        cmd->add_option("--scene", a.scene, "Scene JSON with a start pose")->required();
        cmd->add_option("--model", a.model, "Model JSON")->required()->check(CLI::ExistingFile);
        cmd->add_option("--steps", a.steps, "Maximum control ticks");
        cmd->add_option("--seed", a.seed, "Render noise seed")->capture_default_str();
        cmd->add_option("--noise", a.noise, "Render noise sigma in grey levels")->capture_default_str();
        cmd->add_option("--trajectory", a.trajectory, "Trajectory CSV");
        cmd->add_option("--decisions", a.decisions, "Decision log CSV");
        cmd->add_option("--frames", a.frames, "Directory for numbered PGM frames");
        cmd->callback([&] { result = simulate(a); });
    }
    {
        auto* cmd = app.add_subcommand("flow", "Sparse flow between two frames");
        static std::string prev, next, out, csv;
        static double scale = 4.0;
        static ConfigFlags cf;
        cmd->add_option("prev", prev, "First frame (PGM/PPM)")->required();
        cmd->add_option("next", next, "Second frame (PGM/PPM)")->required();
        cmd->add_option("--out", out, "PPM with the flow drawn over the second frame");
        cmd->add_option("--csv", csv, "Per-point flow CSV");
        cmd->add_option("--scale", scale, "Vector length multiplier for drawing")->capture_default_str();
        cmd->add_option("--config", cf.path, "Pipeline config JSON")->check(CLI::ExistingFile);
        cmd->callback([&] { result = flow_cmd(prev, next, out, csv, scale, cf); });
    }
    {
        auto* cmd = app.add_subcommand("bench", "Per-stage timing and frame rate");
        static BenchArgs a;
        cmd->add_option("--model", a.model, "Model JSON")->check(CLI::ExistingFile);
        cmd->add_option("--scene", a.scene, "Scene to render the benchmark frames from");
        cmd->add_option("--times", a.times, "Given t_op,t_pca,t_svm in ms instead of measuring")->delimiter(',');
        cmd->add_option("--reps", a.reps, "Repetitions")->capture_default_str();
        cmd->add_option("--capture-fps", a.capture_fps, "Camera capture rate")->capture_default_str();
        cmd->callback([&] { result = bench(a); });
    }
    {
        auto* cmd = app.add_subcommand("metrics", "Summarise a per-fold confusion CSV");
        static std::string path;
        cmd->add_option("confusion", path, "CSV with header fold,tp,fp,tn,fn")->required();
        cmd->callback([&] { result = metrics(path); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return result;
}
