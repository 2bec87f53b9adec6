// Command-line front end: instance generation, single solves, sweeps,
// random-graph batches, DIMACS runs and certificate studies.

#include <cliquedecomp/cliquedecomp.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace cd = cliquedecomp;

namespace {

struct Common {
    std::string config_path;
    std::string out_path;
    std::string aggregate_out;
    std::string format = "csv";
    std::uint64_t seed = 0;
    int workers = 1;
    double alpha = 0.0;
    double rho = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    int max_iter = 0;
    std::string model;
    std::string init;
    bool timing = false;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;
    CLI::Option* rho_opt = nullptr;
    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* delta_opt = nullptr;
    CLI::Option* max_iter_opt = nullptr;
    CLI::Option* model_opt = nullptr;
    CLI::Option* init_opt = nullptr;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON config document")->check(CLI::ExistingFile);
    app->add_option("--out", c.out_path, "output path (default stdout)");
    app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    c.seed_opt = app->add_option("--seed", c.seed, "base seed");
    c.workers_opt = app->add_option("--workers", c.workers, "concurrent trials")->check(CLI::PositiveNumber);
    c.alpha_opt = app->add_option("--alpha", c.alpha, "lambda = alpha / sqrt(N)");
    c.rho_opt = app->add_option("--rho", c.rho, "augmented Lagrangian parameter");
    c.epsilon_opt = app->add_option("--epsilon", c.epsilon, "reweighting epsilon");
    c.delta_opt = app->add_option("--delta", c.delta, "stopping tolerance on ||M - L - S||_F");
    c.max_iter_opt = app->add_option("--max-iter", c.max_iter, "iteration cap");
    c.model_opt = app->add_option("--model", c.model, "weighted or regular")
                      ->check(CLI::IsMember({"weighted", "regular"}));
    c.init_opt = app->add_option("--init", c.init, "zeros or random_feasible")
                     ->check(CLI::IsMember({"zeros", "random_feasible"}));
    app->add_flag("--timing", c.timing, "include wall-clock columns");
}

cd::ExperimentSpec base_spec(const Common& c, cd::ExperimentKind kind) {
    cd::ExperimentSpec spec;
    spec.kind = kind;
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw cd::ArgumentError(std::string("config: ") + e.what());
        }
        cd::apply_spec_json(doc, spec);
        spec.kind = kind;
    }
    if (c.seed_opt->count()) spec.seed = c.seed;
    if (c.workers_opt->count()) spec.workers = c.workers;
    if (c.alpha_opt->count()) spec.solver.alpha = c.alpha;
    if (c.rho_opt->count()) spec.solver.rho = c.rho;
    if (c.epsilon_opt->count()) spec.solver.epsilon = c.epsilon;
    if (c.delta_opt->count()) spec.solver.delta = c.delta;
    if (c.max_iter_opt->count()) spec.solver.max_iterations = c.max_iter;
    if (c.model_opt->count()) spec.solver.model = cd::parse_model(c.model);
    if (c.init_opt->count()) spec.solver.init_mode = cd::parse_init_mode(c.init);
    if (c.timing) spec.include_timing = true;
    return spec;
}

void emit_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string aggregate_path(const Common& c) {
    if (!c.aggregate_out.empty()) return c.aggregate_out;
    if (c.out_path.empty() || c.out_path == "-") return {};
    std::filesystem::path p(c.out_path);
    return (p.parent_path() / (p.stem().string() + ".aggregate" + p.extension().string())).string();
}

void emit_tables(const Common& c, const cd::Table& rows, const cd::Table* aggregates) {
    if (c.format == "json") {
        nlohmann::json doc;
        doc["rows"] = cd::table_to_json(rows);
        if (aggregates) doc["aggregates"] = cd::table_to_json(*aggregates);
        emit_text(c.out_path, doc.dump(2) + "\n");
        return;
    }
    std::ostringstream body;
    cd::write_csv(rows, body);
    emit_text(c.out_path, body.str());
    if (!aggregates) return;
    std::ostringstream agg;
    cd::write_csv(*aggregates, agg);
    const std::string path = aggregate_path(c);
    if (path.empty())
        std::cout << '\n' << agg.str();
    else
        emit_text(path, agg.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clique recovery by low-rank plus sparse decomposition"};
    app.require_subcommand(1);

    Common gen_c, sol_c, sweep_c, batch_c, dim_c, cert_c;

    // generate
    auto* gen = app.add_subcommand("generate", "write a planted-clique or G(N, p) instance");
    int gen_n_vertices = 0, gen_clique = 0;
    double gen_p = 0.5;
    bool gen_shuffle = false;
    gen->add_option("--N", gen_n_vertices, "vertices")->required();
    auto* gen_clique_opt = gen->add_option("--n", gen_clique, "planted clique size (omit for G(N, p))");
    gen->add_option("--p", gen_p, "edge probability");
    gen->add_flag("--shuffle", gen_shuffle, "place the clique on random vertices");
    add_common(gen, gen_c);

    // solve
    auto* sol = app.add_subcommand("solve", "decompose one graph (DIMACS or JSON)");
    std::string sol_graph;
    bool sol_traces = false;
    sol->add_option("graph", sol_graph, "graph file")->required()->check(CLI::ExistingFile);
    sol->add_flag("--traces", sol_traces, "include residual and objective traces (json)");
    add_common(sol, sol_c);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "planted-clique recovery over an (N, n) grid");
    std::vector<int> grid_n_vertices, grid_clique;
    int n_stride = 0, trials = 0;
    double grid_p = 0.5;
    bool include_regular = false, shuffle = false;
    auto* sweep_sizes = sweep->add_option("--N", grid_n_vertices, "vertex counts");
    auto* sweep_cliques = sweep->add_option("--n", grid_clique, "clique sizes");
    auto* sweep_stride = sweep->add_option("--n-stride", n_stride, "clique sizes stride, 2 stride, ...");
    auto* sweep_p = sweep->add_option("--p", grid_p, "edge probability");
    auto* sweep_trials = sweep->add_option("--trials", trials, "trials per cell");
    sweep->add_flag("--regular", include_regular, "also run the regular (unweighted) model");
    sweep->add_flag("--shuffle", shuffle, "place the clique on random vertices");
    sweep->add_option("--aggregate-out", sweep_c.aggregate_out, "aggregate CSV path");
    add_common(sweep, sweep_c);

    // random-batch
    auto* batch = app.add_subcommand("random-batch", "maximum clique on G(N, p) graphs");
    auto* batch_sizes = batch->add_option("--N", grid_n_vertices, "vertex counts");
    auto* batch_p = batch->add_option("--p", grid_p, "edge probability");
    auto* batch_trials = batch->add_option("--trials", trials, "graphs per N");
    add_common(batch, batch_c);

    // dimacs
    auto* dim = app.add_subcommand("dimacs", "solve DIMACS clique benchmark files");
    std::vector<std::string> files;
    dim->add_option("files", files, "DIMACS files")->check(CLI::ExistingFile);
    add_common(dim, dim_c);

    // certify
    auto* cert = app.add_subcommand("certify", "dual-certificate checks on planted instances");
    int cert_k = 0, neumann_terms = 0;
    double cert_q = 0.0, gamma = 0.0;
    auto* cert_sizes = cert->add_option("--N", grid_n_vertices, "vertex counts");
    auto* cert_cliques = cert->add_option("--n", grid_clique, "clique sizes");
    auto* cert_p = cert->add_option("--p", grid_p, "edge probability");
    auto* cert_trials = cert->add_option("--trials", trials, "trials per cell");
    auto* cert_k_opt = cert->add_option("--K", cert_k, "golfing rounds");
    auto* cert_q_opt = cert->add_option("--q", cert_q, "golfing sampling probability");
    auto* cert_gamma_opt = cert->add_option("--gamma", gamma, "bound for ||P_Omega P_R||");
    auto* cert_terms_opt = cert->add_option("--neumann-terms", neumann_terms, "Neumann series terms");
    cert->add_option("--aggregate-out", cert_c.aggregate_out, "aggregate CSV path");
    add_common(cert, cert_c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const auto apply_grid = [&](cd::ExperimentSpec& spec, CLI::Option* sizes, CLI::Option* cliques,
                                CLI::Option* p, CLI::Option* t) {
        if (sizes && sizes->count()) spec.sizes = grid_n_vertices;
        if (cliques && cliques->count()) spec.clique_sizes = grid_clique;
        if (p && p->count()) spec.p = grid_p;
        if (t && t->count()) spec.trials = trials;
    };

    Common& common = gen->parsed()     ? gen_c
                     : sol->parsed()   ? sol_c
                     : sweep->parsed() ? sweep_c
                     : batch->parsed() ? batch_c
                     : dim->parsed()   ? dim_c
                                       : cert_c;

    try {
        if (gen->parsed()) {
            const cd::ExperimentSpec spec = base_spec(common, cd::ExperimentKind::single);
            nlohmann::json doc;
            std::ostringstream text;
            if (gen_clique_opt->count()) {
                const auto inst = cd::generate_planted(gen_n_vertices, gen_clique, gen_p, spec.seed, gen_shuffle);
                doc = cd::graph_to_json(inst.graph);
                doc["clique"] = inst.clique_vertices;
                doc["p"] = gen_p;
                doc["seed"] = spec.seed;
                if (common.format != "json") {
                    text << "c planted clique n=" << gen_clique << " p=" << gen_p << " seed=" << spec.seed << '\n';
                    text << "c clique";
                    for (int v : inst.clique_vertices) text << ' ' << v + 1;
                    text << '\n';
                    cd::write_dimacs(inst.graph, text);
                }
            } else {
                const auto g = cd::generate_bernoulli_symmetric(gen_n_vertices, gen_p, spec.seed);
                doc = cd::graph_to_json(g);
                doc["p"] = gen_p;
                doc["seed"] = spec.seed;
                if (common.format != "json") cd::write_dimacs(g, text);
            }
            const bool json_out = common.format == "json" ||
                                  std::filesystem::path(common.out_path).extension() == ".json";
            emit_text(common.out_path, json_out ? doc.dump() + "\n" : text.str());
        } else if (sol->parsed()) {
            const cd::ExperimentSpec spec = base_spec(common, cd::ExperimentKind::single);
            spec.solver.validate();
            const cd::Graph g = cd::load_graph(sol_graph);
            std::optional<cd::GroundTruthPair> truth;
            if (std::filesystem::path(sol_graph).extension() == ".json") {
                std::ifstream in(sol_graph);
                nlohmann::json doc;
                in >> doc;
                if (doc.contains("clique"))
                    truth = cd::make_ground_truth(g, doc.at("clique").get<cd::VertexSet>());
            }
            cd::SolverConfig cfg = spec.solver;
            cfg.init_seed = spec.seed;
            cfg.record_traces = sol_traces;
            const cd::SolveResult res = cd::solve(g, cfg);
            const cd::RecoveryReport report =
                cd::make_report(res.L, res.S, g, truth ? &*truth : nullptr);
            if (common.format == "json") {
                nlohmann::json doc;
                doc["file"] = std::filesystem::path(sol_graph).filename().string();
                doc["N"] = g.n_vertices();
                doc["edges"] = g.edge_count();
                doc["status"] = cd::to_string(res.status);
                doc["iterations"] = res.iterations;
                doc["lambda"] = res.lambda;
                doc["rho"] = res.rho;
                doc["final_residual"] = res.final_residual();
                doc["kkt"] = {{"stationarity_L", res.kkt.stationarity_L},
                              {"stationarity_S", res.kkt.stationarity_S},
                              {"feasibility", res.kkt.feasibility}};
                doc["s_range"] = {res.s_min, res.s_max};
                doc["report"] = cd::to_json(report);
                if (spec.include_timing) doc["wall_time_s"] = res.wall_time;
                if (sol_traces) {
                    doc["residual_trace"] = res.residual_trace;
                    doc["objective_trace"] = res.objective_trace;
                    doc["dual_residual_trace"] = res.dual_residual_trace;
                }
                emit_text(common.out_path, doc.dump(2) + "\n");
            } else {
                cd::DimacsRow row = cd::run_dimacs_graph(g, std::filesystem::path(sol_graph).filename().string(), cfg);
                cd::Table t = cd::to_table(std::vector<cd::DimacsRow>{row}, spec.include_timing);
                t.columns.insert(t.columns.end() - 1, "err_l");
                t.rows[0].insert(t.rows[0].end() - 1,
                                 report.err_l ? cd::Cell(*report.err_l) : cd::Cell(std::monostate{}));
                emit_tables(common, t, nullptr);
            }
        } else if (sweep->parsed()) {
            cd::ExperimentSpec spec = base_spec(common, cd::ExperimentKind::planted_sweep);
            apply_grid(spec, sweep_sizes, sweep_cliques, sweep_p, sweep_trials);
            if (sweep_stride->count()) spec.n_stride = n_stride;
            if (include_regular) spec.include_regular = true;
            if (shuffle) spec.shuffle_labels = true;
            const cd::SweepResult res = cd::run_planted_sweep(spec);
            const cd::Table agg = cd::to_table(res.aggregates);
            emit_tables(common, cd::to_table(res.rows, spec.include_timing), &agg);
        } else if (batch->parsed()) {
            cd::ExperimentSpec spec = base_spec(common, cd::ExperimentKind::random_batch);
            apply_grid(spec, batch_sizes, nullptr, batch_p, batch_trials);
            emit_tables(common, cd::to_table(cd::run_random_batch(spec), spec.include_timing), nullptr);
        } else if (dim->parsed()) {
            cd::ExperimentSpec spec = base_spec(common, cd::ExperimentKind::dimacs);
            if (!files.empty()) spec.files = files;
            emit_tables(common, cd::to_table(cd::run_dimacs(spec), spec.include_timing), nullptr);
        } else if (cert->parsed()) {
            cd::ExperimentSpec spec = base_spec(common, cd::ExperimentKind::certify);
            apply_grid(spec, cert_sizes, cert_cliques, cert_p, cert_trials);
            if (cert_k_opt->count()) spec.certificate.K = cert_k;
            if (cert_q_opt->count()) spec.certificate.q = cert_q;
            if (cert_gamma_opt->count()) spec.certificate.gamma = gamma;
            if (cert_terms_opt->count()) spec.certificate.neumann_terms = neumann_terms;
            const cd::CertifyResult res = cd::run_certify(spec);
            const cd::Table agg = cd::to_table(res.aggregates);
            emit_tables(common, cd::to_table(res.rows), &agg);
        }
    } catch (const cd::ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
