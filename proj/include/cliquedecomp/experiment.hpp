#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "admm.hpp"
#include "certificate.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "metrics.hpp"

namespace cliquedecomp {

enum class ExperimentKind { planted_sweep, random_batch, dimacs, certify, single };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::planted_sweep: return "planted_sweep";
    case ExperimentKind::random_batch: return "random_batch";
    case ExperimentKind::dimacs: return "dimacs";
    case ExperimentKind::certify: return "certify";
    case ExperimentKind::single: return "single";
    }
    return "?";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
    for (auto k : {ExperimentKind::planted_sweep, ExperimentKind::random_batch,
                   ExperimentKind::dimacs, ExperimentKind::certify, ExperimentKind::single})
        if (s == to_string(k)) return k;
    throw ArgumentError("unknown experiment kind '" + s + "'");
}

inline Model parse_model(const std::string& s) {
    if (s == "weighted") return Model::weighted;
    if (s == "regular") return Model::regular;
    throw ArgumentError("model must be 'weighted' or 'regular', got '" + s + "'");
}

inline InitMode parse_init_mode(const std::string& s) {
    if (s == "zeros") return InitMode::zeros;
    if (s == "random_feasible") return InitMode::random_feasible;
    throw ArgumentError("init mode must be 'zeros' or 'random_feasible', got '" + s + "'");
}

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::planted_sweep;
    std::vector<int> sizes;        // N values
    std::vector<int> clique_sizes; // n values; ignored when n_stride is set
    std::optional<int> n_stride;   // n = stride, 2 stride, ... <= N
    double p = 0.5;
    int trials = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    bool include_regular = false;
    bool shuffle_labels = false;
    bool include_timing = false; // wall time is non-deterministic; off by default
    std::vector<std::string> files;
    SolverConfig solver;
    CertificateConfig certificate;

    std::vector<int> clique_sizes_for(int n_vertices) const {
        std::vector<int> out;
        if (n_stride) {
            for (int n = *n_stride; n <= n_vertices; n += *n_stride) out.push_back(n);
        } else {
            for (int n : clique_sizes)
                if (n <= n_vertices) out.push_back(n);
        }
        return out;
    }

    void validate() const {
        if (trials < 1) throw ArgumentError("trials must be at least 1");
        if (workers < 1) throw ArgumentError("workers must be at least 1");
        solver.validate();
        const bool needs_sizes = kind == ExperimentKind::planted_sweep ||
                                 kind == ExperimentKind::random_batch ||
                                 kind == ExperimentKind::certify;
        if (needs_sizes) {
            if (sizes.empty()) throw ArgumentError("grid has no N values");
            for (int n : sizes)
                if (n < 2) throw ArgumentError("every N must be at least 2");
            if (!(p > 0.0 && p < 1.0)) throw ArgumentError("p must lie in (0, 1)");
        }
        if (kind == ExperimentKind::planted_sweep || kind == ExperimentKind::certify) {
            if (n_stride && *n_stride < 1) throw ArgumentError("n stride must be positive");
            if (!n_stride && clique_sizes.empty()) throw ArgumentError("grid has no n values");
            for (int n : clique_sizes)
                if (n < 1) throw ArgumentError("every n must be positive");
            bool any = false;
            for (int nv : sizes) any = any || !clique_sizes_for(nv).empty();
            if (!any) throw ArgumentError("grid has no (N, n) pair with n <= N");
        }
        if (kind == ExperimentKind::dimacs && files.empty())
            throw ArgumentError("dimacs run needs at least one file");
    }
};

// ---------------------------------------------------------------------------
// Config documents

inline void apply_solver_json(const nlohmann::json& j, SolverConfig& c) {
    if (!j.is_object()) throw ArgumentError("'solver' must be an object");
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("lambda") && !j.at("lambda").is_null())
        c.lambda_override = j.at("lambda").get<double>();
    if (j.contains("rho") && !j.at("rho").is_null()) c.rho = j.at("rho").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("epoch_length")) c.epoch_length = j.at("epoch_length").get<int>();
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
    if (j.contains("init_mode")) c.init_mode = parse_init_mode(j.at("init_mode").get<std::string>());
    if (j.contains("init_zero_probability"))
        c.init_zero_probability = j.at("init_zero_probability").get<double>();
}

inline void apply_certificate_json(const nlohmann::json& j, CertificateConfig& c) {
    if (!j.is_object()) throw ArgumentError("'certificate' must be an object");
    if (j.contains("K") && !j.at("K").is_null()) c.K = j.at("K").get<int>();
    if (j.contains("q") && !j.at("q").is_null()) c.q = j.at("q").get<double>();
    if (j.contains("neumann_terms") && !j.at("neumann_terms").is_null())
        c.neumann_terms = j.at("neumann_terms").get<int>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("pq_trials")) c.pq_trials = j.at("pq_trials").get<int>();
    if (j.contains("power_iterations")) c.power_iterations = j.at("power_iterations").get<int>();
}

/// Overlay a JSON config document onto `spec`. Unknown keys are rejected.
inline void apply_spec_json(const nlohmann::json& j, ExperimentSpec& spec) {
    static const std::vector<std::string> known = {
        "kind", "N", "n", "n_stride", "p", "trials", "seed", "workers", "include_regular",
        "shuffle_labels", "include_timing", "files", "solver", "certificate"};
    if (!j.is_object()) throw ArgumentError("config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ArgumentError("unknown config key '" + key + "'");
    try {
        if (j.contains("kind")) spec.kind = parse_experiment_kind(j.at("kind").get<std::string>());
        if (j.contains("N")) spec.sizes = j.at("N").get<std::vector<int>>();
        if (j.contains("n")) spec.clique_sizes = j.at("n").get<std::vector<int>>();
        if (j.contains("n_stride") && !j.at("n_stride").is_null())
            spec.n_stride = j.at("n_stride").get<int>();
        if (j.contains("p")) spec.p = j.at("p").get<double>();
        if (j.contains("trials")) spec.trials = j.at("trials").get<int>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("workers")) spec.workers = j.at("workers").get<int>();
        if (j.contains("include_regular")) spec.include_regular = j.at("include_regular").get<bool>();
        if (j.contains("shuffle_labels")) spec.shuffle_labels = j.at("shuffle_labels").get<bool>();
        if (j.contains("include_timing")) spec.include_timing = j.at("include_timing").get<bool>();
        if (j.contains("files")) spec.files = j.at("files").get<std::vector<std::string>>();
        if (j.contains("solver")) apply_solver_json(j.at("solver"), spec.solver);
        if (j.contains("certificate")) apply_certificate_json(j.at("certificate"), spec.certificate);
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<std::monostate, long long, double, bool, std::string>;

/// Rows of named cells with a fixed column order; emitted as CSV or JSON.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_cell(const Cell& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(long long v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
            std::string out = "\"";
            for (char ch : s) {
                if (ch == '"') out += '"';
                out += ch;
            }
            return out + '"';
        }
    };
    return std::visit(Visitor{}, c);
}

inline nlohmann::json cell_to_json(const Cell& c) {
    struct Visitor {
        nlohmann::json operator()(std::monostate) const { return nullptr; }
        nlohmann::json operator()(long long v) const { return v; }
        nlohmann::json operator()(double v) const {
            if (!std::isfinite(v)) return format_double(v);
            return v;
        }
        nlohmann::json operator()(bool v) const { return v; }
        nlohmann::json operator()(const std::string& s) const { return s; }
    };
    return std::visit(Visitor{}, c);
}

inline void write_csv(const Table& t, std::ostream& out) {
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
}

inline nlohmann::json table_to_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_to_json(row[i]);
        rows.push_back(std::move(obj));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Worker pool

/// Run fn(0..count-1) on up to `workers` threads. Exceptions escaping fn
/// are rethrown after all workers stop.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

namespace detail {

inline std::string describe_failure(const std::exception& e) { return e.what(); }

inline Cell opt_cell(const std::optional<double>& v) {
    return v ? Cell(*v) : Cell(std::monostate{});
}

inline long long as_ll(std::size_t v) { return static_cast<long long>(v); }

} // namespace detail

// ---------------------------------------------------------------------------
// Planted sweep

struct ResultRow {
    int N = 0;
    int n = 0;
    double p = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    Model model = Model::weighted;
    std::string status; // converged | iteration_limit | error
    int iterations = 0;
    std::optional<double> err_l;
    double clique_size_error = 0.0;
    double observed_size = 0.0;
    std::size_t clique_size = 0;
    bool clique_valid = false;
    bool recovered = false;
    double wall_time_s = 0.0;
    std::string error;
};

struct AggregateRow {
    int N = 0;
    int n = 0;
    double p = 0.0;
    Model model = Model::weighted;
    int trials = 0;
    int completed = 0;
    double mean_err_l = 0.0;
    double recovery_probability = 0.0;
    double mean_iterations = 0.0;
    double mean_clique_size_error = 0.0;
};

struct SweepResult {
    std::vector<ResultRow> rows;
    std::vector<AggregateRow> aggregates;
};

inline ResultRow run_planted_trial(int n_vertices, int clique_size, int trial,
                                   const ExperimentSpec& spec, Model model) {
    ResultRow row;
    row.N = n_vertices;
    row.n = clique_size;
    row.p = spec.p;
    row.trial = trial;
    row.seed = spec.seed + static_cast<std::uint64_t>(trial);
    row.model = model;
    try {
        const PlantedInstance inst =
            generate_planted(n_vertices, clique_size, spec.p, row.seed, spec.shuffle_labels);
        const GroundTruthPair truth = inst.ground_truth();
        SolverConfig cfg = spec.solver;
        cfg.model = model;
        cfg.init_seed = row.seed;
        cfg.record_traces = false;
        const SolveResult res = solve(inst.graph, cfg);
        row.status = to_string(res.status);
        row.iterations = res.iterations;
        row.err_l = relative_error(res.L, truth.l_star);
        row.observed_size = std::sqrt(std::max(res.L.sum(), 0.0));
        row.clique_size_error = std::abs(row.observed_size - spectral_norm(res.L));
        row.clique_size = res.clique.size();
        row.clique_valid = res.clique_valid;
        row.recovered = res.status == SolveStatus::converged && *row.err_l < kRecoveryThreshold;
        row.wall_time_s = res.wall_time;
    } catch (const std::exception& e) {
        row.status = "error";
        row.error = detail::describe_failure(e);
    }
    return row;
}

inline std::vector<Model> sweep_models(const ExperimentSpec& spec) {
    std::vector<Model> models{spec.solver.model};
    if (spec.include_regular && spec.solver.model != Model::regular)
        models.push_back(Model::regular);
    return models;
}

inline std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
    std::vector<AggregateRow> out;
    for (std::size_t start = 0; start < rows.size();) {
        std::size_t end = start;
        const auto same = [&](const ResultRow& r) {
            return r.N == rows[start].N && r.n == rows[start].n && r.model == rows[start].model;
        };
        while (end < rows.size() && same(rows[end])) ++end;
        AggregateRow a;
        a.N = rows[start].N;
        a.n = rows[start].n;
        a.p = rows[start].p;
        a.model = rows[start].model;
        a.trials = static_cast<int>(end - start);
        double err = 0.0, iters = 0.0, cse = 0.0;
        int recovered = 0;
        for (std::size_t i = start; i < end; ++i) {
            const ResultRow& r = rows[i];
            if (r.status == "error") continue;
            ++a.completed;
            err += *r.err_l;
            iters += r.iterations;
            cse += r.clique_size_error;
            recovered += r.recovered ? 1 : 0;
        }
        if (a.completed > 0) {
            a.mean_err_l = err / a.completed;
            a.mean_iterations = iters / a.completed;
            a.mean_clique_size_error = cse / a.completed;
        } else {
            a.mean_err_l = a.mean_iterations = a.mean_clique_size_error = std::nan("");
        }
        a.recovery_probability = static_cast<double>(recovered) / a.trials;
        out.push_back(a);
        start = end;
    }
    return out;
}

/// Rows sorted by (N, n, model, trial); the weighted model sorts first.
inline SweepResult run_planted_sweep(const ExperimentSpec& spec) {
    spec.validate();
    struct Job {
        int N, n, trial;
        Model model;
    };
    std::vector<Job> jobs;
    for (int nv : spec.sizes)
        for (int n : spec.clique_sizes_for(nv))
            for (Model m : sweep_models(spec))
                for (int t = 0; t < spec.trials; ++t) jobs.push_back({nv, n, t, m});

    SweepResult out;
    out.rows.resize(jobs.size());
    parallel_for(jobs.size(), spec.workers, [&](std::size_t i) {
        out.rows[i] = run_planted_trial(jobs[i].N, jobs[i].n, jobs[i].trial, spec, jobs[i].model);
    });
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tuple(a.N, a.n, static_cast<int>(a.model), a.trial) <
               std::tuple(b.N, b.n, static_cast<int>(b.model), b.trial);
    });
    out.aggregates = aggregate(out.rows);
    return out;
}

inline Table to_table(const std::vector<ResultRow>& rows, bool include_timing) {
    Table t;
    t.columns = {"N", "n", "p", "trial", "seed", "model", "status", "iterations", "err_l",
                 "recovered", "clique_size", "clique_valid", "clique_size_error",
                 "observed_size"};
    if (include_timing) t.columns.push_back("wall_time_s");
    t.columns.push_back("error");
    for (const auto& r : rows) {
        std::vector<Cell> c{(long long)r.N, (long long)r.n, r.p, (long long)r.trial,
                            (long long)r.seed, std::string(to_string(r.model)), r.status,
                            (long long)r.iterations, detail::opt_cell(r.err_l), r.recovered,
                            detail::as_ll(r.clique_size), r.clique_valid, r.clique_size_error,
                            r.observed_size};
        if (include_timing) c.emplace_back(r.wall_time_s);
        c.emplace_back(r.error);
        t.rows.push_back(std::move(c));
    }
    return t;
}

inline Table to_table(const std::vector<AggregateRow>& rows) {
    Table t;
    t.columns = {"N", "n", "p", "model", "trials", "completed", "mean_err_l",
                 "recovery_probability", "mean_iterations", "mean_clique_size_error"};
    for (const auto& a : rows)
        t.rows.push_back({(long long)a.N, (long long)a.n, a.p, std::string(to_string(a.model)),
                          (long long)a.trials, (long long)a.completed, a.mean_err_l,
                          a.recovery_probability, a.mean_iterations, a.mean_clique_size_error});
    return t;
}

// ---------------------------------------------------------------------------
// Random graphs

/// Clique-size errors below this round to zero at two decimals.
inline constexpr double kZeroCliqueSizeError = 0.005;

struct RandomRow {
    int N = 0;
    double p = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    Model model = Model::weighted;
    std::string status;
    int iterations = 0;
    double observed_size = 0.0;
    double spectral_norm = 0.0;
    double clique_size_error = 0.0;
    std::size_t clique_size = 0;
    bool clique_valid = false;
    std::size_t strict_size = 0;
    double wall_time_s = 0.0;
    std::string error;
};

inline RandomRow run_random_trial(int n_vertices, int trial, const ExperimentSpec& spec) {
    RandomRow row;
    row.N = n_vertices;
    row.p = spec.p;
    row.trial = trial;
    row.seed = spec.seed + static_cast<std::uint64_t>(trial);
    row.model = spec.solver.model;
    try {
        const Graph g = generate_bernoulli_symmetric(n_vertices, spec.p, row.seed);
        SolverConfig cfg = spec.solver;
        cfg.init_seed = row.seed;
        cfg.record_traces = false;
        const SolveResult res = solve(g, cfg);
        row.status = to_string(res.status);
        row.iterations = res.iterations;
        row.observed_size = std::sqrt(std::max(res.L.sum(), 0.0));
        row.spectral_norm = spectral_norm(res.L);
        row.clique_size_error = std::abs(row.observed_size - row.spectral_norm);
        row.clique_size = res.clique.size();
        row.clique_valid = res.clique_valid;
        row.strict_size =
            res.clique_valid ? res.clique.size() : prune_to_clique(g, res.clique).size();
        row.wall_time_s = res.wall_time;
    } catch (const std::exception& e) {
        row.status = "error";
        row.error = detail::describe_failure(e);
    }
    return row;
}

inline std::vector<RandomRow> run_random_batch(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<std::pair<int, int>> jobs;
    for (int nv : spec.sizes)
        for (int t = 0; t < spec.trials; ++t) jobs.emplace_back(nv, t);
    std::vector<RandomRow> rows(jobs.size());
    parallel_for(jobs.size(), spec.workers, [&](std::size_t i) {
        rows[i] = run_random_trial(jobs[i].first, jobs[i].second, spec);
    });
    std::stable_sort(rows.begin(), rows.end(), [](const RandomRow& a, const RandomRow& b) {
        return std::tuple(a.N, a.trial) < std::tuple(b.N, b.trial);
    });
    return rows;
}

inline Table to_table(const std::vector<RandomRow>& rows, bool include_timing) {
    Table t;
    t.columns = {"N", "p", "trial", "seed", "model", "status", "iterations", "observed_size",
                 "spectral_norm", "clique_size_error", "clique_size", "clique_valid",
                 "strict_size"};
    if (include_timing) t.columns.push_back("wall_time_s");
    t.columns.push_back("error");
    for (const auto& r : rows) {
        std::vector<Cell> c{(long long)r.N, r.p, (long long)r.trial, (long long)r.seed,
                            std::string(to_string(r.model)), r.status, (long long)r.iterations,
                            r.observed_size, r.spectral_norm, r.clique_size_error,
                            detail::as_ll(r.clique_size), r.clique_valid,
                            detail::as_ll(r.strict_size)};
        if (include_timing) c.emplace_back(r.wall_time_s);
        c.emplace_back(r.error);
        t.rows.push_back(std::move(c));
    }
    return t;
}

// ---------------------------------------------------------------------------
// DIMACS graphs

struct DimacsRow {
    std::string file;
    int N = 0;
    long long edges = 0;
    double rho = 0.0;
    std::string status;
    int iterations = 0;
    std::size_t decomposition_size = 0; // vertices with L_ii >= 0.5
    bool clique_valid = false;
    std::size_t strict_size = 0;        // after pruning to a complete subgraph
    double observed_size = 0.0;
    double clique_size_error = 0.0;
    double wall_time_s = 0.0;
    std::string error;
};

inline DimacsRow run_dimacs_graph(const Graph& g, const std::string& name, const SolverConfig& config) {
    DimacsRow row;
    row.file = name;
    row.N = g.n_vertices();
    row.edges = g.edge_count();
    SolverConfig cfg = config;
    cfg.record_traces = false;
    const SolveResult res = solve(g, cfg);
    row.rho = res.rho;
    row.status = to_string(res.status);
    row.iterations = res.iterations;
    row.decomposition_size = res.clique.size();
    row.clique_valid = res.clique_valid;
    row.strict_size = res.clique_valid ? res.clique.size() : prune_to_clique(g, res.clique).size();
    row.observed_size = std::sqrt(std::max(res.L.sum(), 0.0));
    row.clique_size_error = std::abs(row.observed_size - spectral_norm(res.L));
    row.wall_time_s = res.wall_time;
    return row;
}

/// One row per file, in the order given; parse and solver failures are
/// reported on the row.
inline std::vector<DimacsRow> run_dimacs(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<DimacsRow> rows(spec.files.size());
    parallel_for(spec.files.size(), spec.workers, [&](std::size_t i) {
        const std::string& file = spec.files[i];
        try {
            rows[i] = run_dimacs_graph(load_graph(file), std::filesystem::path(file).filename().string(),
                                       spec.solver);
        } catch (const std::exception& e) {
            rows[i].file = std::filesystem::path(file).filename().string();
            rows[i].status = "error";
            rows[i].error = detail::describe_failure(e);
        }
    });
    return rows;
}

inline Table to_table(const std::vector<DimacsRow>& rows, bool include_timing) {
    Table t;
    t.columns = {"file", "N", "edges", "rho", "status", "iterations", "decomposition_size",
                 "clique_valid", "strict_size", "observed_size", "clique_size_error"};
    if (include_timing) t.columns.push_back("wall_time_s");
    t.columns.push_back("error");
    for (const auto& r : rows) {
        std::vector<Cell> c{r.file, (long long)r.N, r.edges, r.rho, r.status,
                            (long long)r.iterations, detail::as_ll(r.decomposition_size),
                            r.clique_valid, detail::as_ll(r.strict_size), r.observed_size,
                            r.clique_size_error};
        if (include_timing) c.emplace_back(r.wall_time_s);
        c.emplace_back(r.error);
        t.rows.push_back(std::move(c));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Certificates

inline constexpr double kRangeLeakTolerance = 1e-8;

struct CertRow {
    int N = 0;
    int n = 0;
    double p = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string status; // ok | error
    std::optional<CertificateReport> report;
    std::string error;
};

struct CertAggregateRow {
    int N = 0;
    int n = 0;
    int trials = 0;
    int completed = 0;
    double pass_rate = 0.0;
    double monotone_rate = 0.0;
    double range_rate = 0.0; // both W^L and W^S in R⊥ to kRangeLeakTolerance
};

struct CertifyResult {
    std::vector<CertRow> rows;
    std::vector<CertAggregateRow> aggregates;
};

inline CertRow run_certify_trial(int n_vertices, int clique_size, int trial, const ExperimentSpec& spec) {
    CertRow row;
    row.N = n_vertices;
    row.n = clique_size;
    row.p = spec.p;
    row.trial = trial;
    row.seed = spec.seed + static_cast<std::uint64_t>(trial);
    try {
        const PlantedInstance inst =
            generate_planted(n_vertices, clique_size, spec.p, row.seed, spec.shuffle_labels);
        const GroundTruthPair truth = inst.ground_truth();
        const Matrix c = update_weights(truth.s_star, spec.solver.epsilon);
        CertificateConfig cfg = spec.certificate;
        cfg.seed = row.seed;
        const double alpha = spec.solver.alpha;
        row.report = certify(truth, c, alpha, cfg);
        row.status = "ok";
    } catch (const std::exception& e) {
        row.status = "error";
        row.error = detail::describe_failure(e);
    }
    return row;
}

inline CertifyResult run_certify(const ExperimentSpec& spec) {
    spec.validate();
    struct Job {
        int N, n, trial;
    };
    std::vector<Job> jobs;
    for (int nv : spec.sizes)
        for (int n : spec.clique_sizes_for(nv))
            for (int t = 0; t < spec.trials; ++t) jobs.push_back({nv, n, t});
    CertifyResult out;
    out.rows.resize(jobs.size());
    parallel_for(jobs.size(), spec.workers, [&](std::size_t i) {
        out.rows[i] = run_certify_trial(jobs[i].N, jobs[i].n, jobs[i].trial, spec);
    });
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const CertRow& a, const CertRow& b) {
        return std::tuple(a.N, a.n, a.trial) < std::tuple(b.N, b.n, b.trial);
    });
    for (std::size_t start = 0; start < out.rows.size();) {
        std::size_t end = start;
        while (end < out.rows.size() && out.rows[end].N == out.rows[start].N &&
               out.rows[end].n == out.rows[start].n)
            ++end;
        CertAggregateRow a;
        a.N = out.rows[start].N;
        a.n = out.rows[start].n;
        a.trials = static_cast<int>(end - start);
        int pass = 0, mono = 0, range = 0;
        for (std::size_t i = start; i < end; ++i) {
            const auto& rep = out.rows[i].report;
            if (!rep) continue;
            ++a.completed;
            pass += rep->overall_pass;
            mono += rep->golfing_monotone;
            range += rep->wl_range_leak <= kRangeLeakTolerance &&
                     rep->ws_range_leak <= kRangeLeakTolerance;
        }
        a.pass_rate = static_cast<double>(pass) / a.trials;
        a.monotone_rate = static_cast<double>(mono) / a.trials;
        a.range_rate = static_cast<double>(range) / a.trials;
        out.aggregates.push_back(a);
        start = end;
    }
    return out;
}

inline const std::vector<std::string>& certificate_check_names() {
    static const std::vector<std::string> names = {
        "norm_w",  "omega_uu_wl_fro", "omega_perp_uu_w_inf", "norm_wl", "omega_perp_uu_wl_inf",
        "norm_ws", "omega_perp_ws_inf", "pq_norm"};
    return names;
}

inline Table to_table(const std::vector<CertRow>& rows) {
    Table t;
    t.columns = {"N", "n", "p", "trial", "seed", "status", "K", "q", "sparsity", "overall_pass"};
    for (const auto& name : certificate_check_names()) {
        t.columns.push_back(name);
        t.columns.push_back(name + "_pass");
    }
    for (const char* extra : {"golfing_monotone", "golfing_final_residual", "neumann_tail_ratio",
                              "wl_range_leak", "ws_range_leak", "sign_norm_ratio", "f_inf",
                              "p_omega_b_fro", "clique_block_bound", "error"})
        t.columns.emplace_back(extra);
    const std::size_t width = t.columns.size();
    for (const auto& r : rows) {
        std::vector<Cell> c{(long long)r.N, (long long)r.n, r.p, (long long)r.trial,
                            (long long)r.seed, r.status};
        if (r.report) {
            const CertificateReport& rep = *r.report;
            c.insert(c.end(), {(long long)rep.K, rep.q, rep.sparsity, rep.overall_pass});
            for (const auto& name : certificate_check_names()) {
                const CertificateCheck& chk = rep.check(name);
                c.emplace_back(chk.value);
                c.emplace_back(chk.pass);
            }
            c.insert(c.end(), {rep.golfing_monotone, rep.golfing_residuals.back(),
                               rep.neumann_tail_ratio, rep.wl_range_leak, rep.ws_range_leak,
                               rep.sign_norm_ratio, rep.f_inf, rep.p_omega_b_fro,
                               rep.clique_block_bound});
        }
        c.resize(width - 1);
        c.emplace_back(r.error);
        t.rows.push_back(std::move(c));
    }
    return t;
}

inline Table to_table(const std::vector<CertAggregateRow>& rows) {
    Table t;
    t.columns = {"N", "n", "trials", "completed", "pass_rate", "monotone_rate", "range_rate"};
    for (const auto& a : rows)
        t.rows.push_back({(long long)a.N, (long long)a.n, (long long)a.trials,
                          (long long)a.completed, a.pass_rate, a.monotone_rate, a.range_rate});
    return t;
}

} // namespace cliquedecomp
