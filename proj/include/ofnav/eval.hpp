#pragma once

// Confusion matrices, the four metrics, fold construction, cross-validation and stage timing.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ofnav/classifier.hpp"
#include "ofnav/dataset.hpp"
#include "ofnav/error.hpp"

namespace ofnav {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }

    void add(Label predicted, Label truth) {
        if (predicted == Label::Positive) (truth == Label::Positive ? tp : fp)++;
        else (truth == Label::Negative ? tn : fn)++;
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        return *this;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

inline std::optional<double> try_precision(const ConfusionMatrix& c) {
    if (c.tp + c.fp == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline std::optional<double> try_recall(const ConfusionMatrix& c) {
    if (c.tp + c.fn == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

/// Harmonic mean of precision and recall; undefined when either is, or when both are 0.
inline std::optional<double> try_f_measure(const ConfusionMatrix& c) {
    const auto p = try_precision(c);
    const auto r = try_recall(c);
    if (!p || !r || *p + *r == 0.0) return std::nullopt;
    return 2.0 * *p * *r / (*p + *r);
}

inline std::optional<double> try_accuracy(const ConfusionMatrix& c) {
    if (c.total() == 0) return std::nullopt;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

namespace detail {
inline double defined_or_throw(std::optional<double> v, const char* name) {
    if (!v) fail(ErrorKind::UndefinedMetric, std::string(name) + " is undefined (zero denominator)");
    return *v;
}
}  // namespace detail

inline double precision(const ConfusionMatrix& c) { return detail::defined_or_throw(try_precision(c), "precision"); }
inline double recall(const ConfusionMatrix& c) { return detail::defined_or_throw(try_recall(c), "recall"); }
inline double f_measure(const ConfusionMatrix& c) { return detail::defined_or_throw(try_f_measure(c), "F-measure"); }
inline double accuracy(const ConfusionMatrix& c) { return detail::defined_or_throw(try_accuracy(c), "accuracy"); }

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (divisor n-1); 0 for n = 1
};

inline MeanStd mean_std(std::span<const double> v) {
    if (v.empty()) fail(ErrorKind::InvalidArgument, "mean_std: empty input");
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

/// Per-metric mean and sample std over folds; a metric is absent when any fold leaves it undefined.
struct MetricSummary {
    std::optional<MeanStd> precision, recall, f_measure, accuracy;
};

inline MetricSummary summarize(std::span<const ConfusionMatrix> folds) {
    if (folds.empty()) fail(ErrorKind::InvalidArgument, "summarize: no folds");
    auto collect = [&](auto metric) -> std::optional<MeanStd> {
        std::vector<double> v;
        for (const auto& c : folds) {
            const auto m = metric(c);
            if (!m) return std::nullopt;
            v.push_back(*m);
        }
        return mean_std(v);
    };
    return {collect(try_precision), collect(try_recall), collect(try_f_measure), collect(try_accuracy)};
}

/// "75.46±6.21" in percent, or "-" when undefined.
inline std::string format_percent(const std::optional<MeanStd>& m) {
    if (!m) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << 100.0 * m->mean << "\xC2\xB1" << 100.0 * m->std;
    return os.str();
}

inline void write_summary(std::ostream& out, const MetricSummary& s) {
    out << "precision " << format_percent(s.precision) << '\n'
        << "recall    " << format_percent(s.recall) << '\n'
        << "F         " << format_percent(s.f_measure) << '\n'
        << "accuracy  " << format_percent(s.accuracy) << '\n';
}

/// Confusion CSV: header "fold,tp,fp,tn,fn".
inline std::vector<ConfusionMatrix> read_confusion_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim_cr(line) != "fold,tp,fp,tn,fn") {
        fail(ErrorKind::DataFormat, "confusion csv: expected header 'fold,tp,fp,tn,fn'");
    }
    std::vector<ConfusionMatrix> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto t = detail::trim_cr(line);
        if (t.empty()) continue;
        const auto f = detail::split_csv(t);
        if (f.size() != 5) fail(ErrorKind::DataFormat, "confusion csv: row " + std::to_string(row) + " needs 5 fields");
        std::size_t v[4];
        for (int k = 0; k < 4; ++k) {
            const long x = detail::parse_long(f[k + 1], row);
            if (x < 0) fail(ErrorKind::DataFormat, "confusion csv: negative count on row " + std::to_string(row));
            v[k] = static_cast<std::size_t>(x);
        }
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    if (out.empty()) fail(ErrorKind::DataFormat, "confusion csv: no rows");
    return out;
}

inline void write_confusion_csv(std::ostream& out, std::span<const ConfusionMatrix> folds) {
    out << "fold,tp,fp,tn,fn\n";
    for (std::size_t i = 0; i < folds.size(); ++i) {
        const auto& c = folds[i];
        out << i + 1 << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << '\n';
    }
}

// ---------------------------------------------------------------------------
// folds

/// Contiguous folds: the first n % k folds receive one extra index.
inline std::vector<std::vector<std::size_t>> kfold_contiguous(std::size_t n, std::size_t k) {
    if (k < 2 || k > n) fail(ErrorKind::InvalidArgument, "kfold: need 2 <= k <= n");
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) folds[f].push_back(next++);
    }
    return folds;
}

/// Seeded permutation cut into contiguous folds; each fold is returned sorted.
inline std::vector<std::vector<std::size_t>> kfold_shuffled(std::size_t n, std::size_t k, std::uint64_t seed) {
    auto folds = kfold_contiguous(n, k);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
    for (auto& f : folds) {
        for (auto& idx : f) idx = perm[idx];
        std::sort(f.begin(), f.end());
    }
    return folds;
}

/// One fold per distinct group id, in ascending id order.
inline std::vector<std::vector<std::size_t>> kfold_grouped(std::span<const int> groups, std::size_t k) {
    if (k < 2 || k > groups.size()) fail(ErrorKind::InvalidArgument, "kfold: need 2 <= k <= n");
    std::map<int, std::size_t> slot;
    for (int g : groups) slot.emplace(g, 0);
    if (slot.size() != k) {
        fail(ErrorKind::InvalidArgument,
             "kfold: grouped mode needs exactly k=" + std::to_string(k) + " groups, found " + std::to_string(slot.size()));
    }
    std::size_t f = 0;
    for (auto& [_, s] : slot) s = f++;
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < groups.size(); ++i) folds[slot[groups[i]]].push_back(i);
    return folds;
}

inline std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, FoldMode mode,
                                                         std::span<const int> groups = {}, std::uint64_t seed = 0) {
    switch (mode) {
        case FoldMode::Contiguous: return kfold_contiguous(n, k);
        case FoldMode::Shuffled: return kfold_shuffled(n, k, seed);
        case FoldMode::Grouped:
            if (groups.size() != n) fail(ErrorKind::InvalidArgument, "kfold: grouped mode needs one group id per sample");
            return kfold_grouped(groups, k);
    }
    fail(ErrorKind::InvalidArgument, "kfold: unknown mode");
}

// ---------------------------------------------------------------------------
// timing

struct StageTimes {
    double t_op = 0.0;   // ms
    double t_pca = 0.0;  // ms
    double t_svm = 0.0;  // ms

    double total() const noexcept { return t_op + t_pca + t_svm; }
};

/// Frames per second when processing alone bounds the loop.
inline double pipeline_fps(const StageTimes& t) {
    if (!(t.total() > 0.0)) fail(ErrorKind::InvalidArgument, "fps: total stage time must be > 0");
    return 1000.0 / t.total();
}

/// Frames per second when each processed frame must also be captured at capture_fps.
inline double capture_adjusted_fps(const StageTimes& t, double capture_fps) {
    require(capture_fps > 0.0, "fps: capture rate must be > 0");
    if (!(t.total() >= 0.0)) fail(ErrorKind::InvalidArgument, "fps: stage times must be >= 0");
    return 1000.0 / (t.total() + 1000.0 / capture_fps);
}

/// Mean wall-clock ms of op() over `reps` runs; one extra warmup run is excluded.
template <class F>
double time_stage(F&& op, std::size_t reps) {
    require(reps >= 1, "time_stage: repetitions must be >= 1");
    using clock = std::chrono::steady_clock;
    op();
    const auto t0 = clock::now();
    for (std::size_t i = 0; i < reps; ++i) op();
    const std::chrono::duration<double, std::milli> dt = clock::now() - t0;
    return std::max(0.0, dt.count() / static_cast<double>(reps));
}

// ---------------------------------------------------------------------------
// cross-validation

struct FoldReport {
    std::size_t fold_index = 0;
    ConfusionMatrix confusion;
    StageTimes timings;  // t_op stays 0 when the dataset carries no frames
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t pca_rank = 0;
};

struct CrossvalResult {
    std::vector<FoldReport> folds;
    MetricSummary summary;
    std::vector<Label> predictions;  // one per sample, indexed like the dataset
};

struct CrossvalOptions {
    unsigned jobs = 1;
    /// Called once per fold with the classifier trained on that fold's training split.
    std::function<void(std::size_t fold, const Classifier&)> on_fold;
};

namespace detail {

inline FoldReport run_fold(const Dataset& ds, const std::vector<std::size_t>& test, std::size_t fold,
                           const PipelineConfig& cfg, std::vector<Label>& predictions,
                           const CrossvalOptions& opt) {
    std::vector<char> held(ds.size(), 0);
    for (auto i : test) held[i] = 1;
    std::vector<LabeledSample> train;
    train.reserve(ds.size() - test.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!held[i]) train.push_back(ds.samples[i]);
    }
    using clock = std::chrono::steady_clock;
    try {
        TrainReport tr;
        const Classifier clf = train_classifier(train, cfg, &tr);
        if (opt.on_fold) opt.on_fold(fold, clf);

        FoldReport rep;
        rep.fold_index = fold;
        rep.train_size = train.size();
        rep.test_size = test.size();
        rep.pca_rank = tr.pca_rank;
        std::chrono::duration<double, std::milli> t_pca{0}, t_svm{0};
        for (auto i : test) {
            const auto c = clf.condition(ds.samples[i].features);
            const auto t0 = clock::now();
            const auto z = clf.project(c);
            const auto t1 = clock::now();
            const Label p = clf.predict_projected(z);
            t_pca += t1 - t0;
            t_svm += clock::now() - t1;
            predictions[i] = p;
            rep.confusion.add(p, ds.samples[i].label);
        }
        if (!test.empty()) {
            rep.timings.t_pca = t_pca.count() / static_cast<double>(test.size());
            rep.timings.t_svm = t_svm.count() / static_cast<double>(test.size());
        }
        return rep;
    } catch (const Error& e) {
        fail(e.kind(), "fold " + std::to_string(fold + 1) + ": " + e.what());
    }
}

}  // namespace detail

/// Every sample is predicted exactly once by a model (PCA included) fitted without it.
inline CrossvalResult crossval(const Dataset& ds, const PipelineConfig& cfg, const CrossvalOptions& opt = {}) {
    cfg.validate();
    if (ds.samples.empty()) fail(ErrorKind::InvalidArgument, "crossval: empty dataset");
    const auto folds = kfold_split(ds.size(), static_cast<std::size_t>(cfg.k), cfg.fold_mode, ds.recording, cfg.seed);

    CrossvalResult res;
    res.predictions.assign(ds.size(), Label::Negative);
    res.folds.resize(folds.size());
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(folds.size())));
    if (jobs == 1) {
        for (std::size_t f = 0; f < folds.size(); ++f) {
            res.folds[f] = detail::run_fold(ds, folds[f], f, cfg, res.predictions, opt);
        }
    } else {
        std::vector<std::exception_ptr> errors(folds.size());
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (std::size_t f = next++; f < folds.size(); f = next++) {
                    try {
                        res.folds[f] = detail::run_fold(ds, folds[f], f, cfg, res.predictions, opt);
                    } catch (...) {
                        errors[f] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }
    std::vector<ConfusionMatrix> cms;
    for (const auto& r : res.folds) cms.push_back(r.confusion);
    res.summary = summarize(cms);
    return res;
}

/// Fold report CSV: fold,train,test,pca_rank,tp,fp,tn,fn,precision,recall,f,accuracy,t_op_ms,t_pca_ms,t_svm_ms.
/// Undefined metrics are written as empty fields.
inline void write_fold_reports(std::ostream& out, std::span<const FoldReport> folds) {
    auto opt = [](std::optional<double> v) { return v ? detail::format_double(*v) : std::string(); };
    out << "fold,train,test,pca_rank,tp,fp,tn,fn,precision,recall,f,accuracy,t_op_ms,t_pca_ms,t_svm_ms\n";
    for (const auto& r : folds) {
        const auto& c = r.confusion;
        out << r.fold_index + 1 << ',' << r.train_size << ',' << r.test_size << ',' << r.pca_rank << ',' << c.tp << ','
            << c.fp << ',' << c.tn << ',' << c.fn << ',' << opt(try_precision(c)) << ',' << opt(try_recall(c)) << ','
            << opt(try_f_measure(c)) << ',' << opt(try_accuracy(c)) << ',' << detail::format_double(r.timings.t_op)
            << ',' << detail::format_double(r.timings.t_pca) << ',' << detail::format_double(r.timings.t_svm) << '\n';
    }
}

}  // namespace ofnav
