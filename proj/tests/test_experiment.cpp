#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include <cliquedecomp/experiment.hpp>

using namespace cliquedecomp;

namespace {

ExperimentSpec small_sweep() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::planted_sweep;
    spec.sizes = {40};
    spec.clique_sizes = {10, 20};
    spec.trials = 3;
    spec.seed = 17;
    spec.include_regular = true;
    spec.solver.max_iterations = 200;
    return spec;
}

std::string csv(const Table& t) {
    std::ostringstream out;
    write_csv(t, out);
    return out.str();
}

} // namespace

TEST(ExperimentSpec, GridValidation) {
    ExperimentSpec spec = small_sweep();
    spec.sizes.clear();
    EXPECT_THROW(run_planted_sweep(spec), ArgumentError);
    spec = small_sweep();
    spec.clique_sizes = {50};
    EXPECT_THROW(run_planted_sweep(spec), ArgumentError);
    spec = small_sweep();
    spec.trials = 0;
    EXPECT_THROW(run_planted_sweep(spec), ArgumentError);
    spec = small_sweep();
    spec.p = 1.0;
    EXPECT_THROW(run_planted_sweep(spec), ArgumentError);

    ExperimentSpec batch;
    batch.kind = ExperimentKind::random_batch;
    batch.sizes = {20};
    batch.trials = 0;
    EXPECT_THROW(run_random_batch(batch), ArgumentError);

    ExperimentSpec dimacs;
    dimacs.kind = ExperimentKind::dimacs;
    EXPECT_THROW(run_dimacs(dimacs), ArgumentError);
}

TEST(ExperimentSpec, StrideExpandsCliqueSizes) {
    ExperimentSpec spec;
    spec.n_stride = 15;
    EXPECT_EQ(spec.clique_sizes_for(50), (std::vector<int>{15, 30, 45}));
    spec.n_stride.reset();
    spec.clique_sizes = {10, 60};
    EXPECT_EQ(spec.clique_sizes_for(50), (std::vector<int>{10}));
}

TEST(ExperimentSpec, JsonOverlay) {
    ExperimentSpec spec;
    apply_spec_json(nlohmann::json::parse(R"({
        "kind": "random_batch", "N": [30, 40], "p": 0.8, "trials": 4, "seed": 9,
        "solver": {"alpha": 0.03, "rho": 0.4, "model": "regular", "init_mode": "random_feasible"},
        "certificate": {"K": 12, "q": 0.2}
    })"), spec);
    EXPECT_EQ(spec.kind, ExperimentKind::random_batch);
    EXPECT_EQ(spec.sizes, (std::vector<int>{30, 40}));
    EXPECT_EQ(spec.trials, 4);
    EXPECT_EQ(spec.seed, 9u);
    EXPECT_EQ(spec.solver.alpha, 0.03);
    EXPECT_EQ(*spec.solver.rho, 0.4);
    EXPECT_EQ(spec.solver.model, Model::regular);
    EXPECT_EQ(spec.solver.init_mode, InitMode::random_feasible);
    EXPECT_EQ(*spec.certificate.K, 12);

    EXPECT_THROW(apply_spec_json(nlohmann::json::parse(R"({"bogus": 1})"), spec), ArgumentError);
    EXPECT_THROW(apply_spec_json(nlohmann::json::parse(R"({"trials": "many"})"), spec), ArgumentError);
    EXPECT_THROW(apply_spec_json(nlohmann::json::parse(R"({"solver": {"model": "x"}})"), spec),
                 ArgumentError);
}

TEST(Tables, CsvFormatting) {
    Table t;
    t.columns = {"a", "b", "c", "d", "e"};
    t.rows.push_back({1LL, 0.1, true, std::string("x,\"y\""), std::monostate{}});
    t.rows.push_back({-2LL, std::nan(""), false, std::string("plain"), 1e-300});
    EXPECT_EQ(csv(t), "a,b,c,d,e\n1,0.1,true,\"x,\"\"y\"\"\",\n-2,nan,false,plain,1e-300\n");
    const auto j = table_to_json(t);
    EXPECT_EQ(j[0]["d"], "x,\"y\"");
    EXPECT_TRUE(j[0]["e"].is_null());
    EXPECT_EQ(j[1]["b"], "nan");
}

TEST(Tables, DoubleFormattingRoundTrips) {
    Xoshiro256 rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal() * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(PlantedSweep, RowsSortedAndAggregated) {
    const ExperimentSpec spec = small_sweep();
    const SweepResult res = run_planted_sweep(spec);
    ASSERT_EQ(res.rows.size(), 12u);
    ASSERT_EQ(res.aggregates.size(), 4u);
    EXPECT_EQ(res.rows[0].model, Model::weighted);
    EXPECT_EQ(res.rows[3].model, Model::regular);
    EXPECT_EQ(res.rows[6].n, 20);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        EXPECT_EQ(res.rows[i].trial, static_cast<int>(i % 3));
        EXPECT_EQ(res.rows[i].seed, spec.seed + res.rows[i].trial);
        EXPECT_NE(res.rows[i].status, "error") << res.rows[i].error;
    }
    for (std::size_t a = 0; a < res.aggregates.size(); ++a) {
        double err = 0.0;
        int recovered = 0;
        for (std::size_t i = 3 * a; i < 3 * a + 3; ++i) {
            err += *res.rows[i].err_l;
            recovered += res.rows[i].recovered;
        }
        EXPECT_NEAR(res.aggregates[a].mean_err_l, err / 3, 1e-15);
        EXPECT_EQ(res.aggregates[a].recovery_probability, recovered / 3.0);
        EXPECT_EQ(res.aggregates[a].completed, 3);
    }
}

TEST(PlantedSweep, ByteIdenticalAcrossWorkerCounts) {
    ExperimentSpec spec = small_sweep();
    spec.workers = 1;
    const SweepResult serial = run_planted_sweep(spec);
    spec.workers = 4;
    const SweepResult parallel = run_planted_sweep(spec);
    EXPECT_EQ(csv(to_table(serial.rows, false)), csv(to_table(parallel.rows, false)));
    EXPECT_EQ(csv(to_table(serial.aggregates)), csv(to_table(parallel.aggregates)));
    EXPECT_EQ(table_to_json(to_table(serial.rows, false)), table_to_json(to_table(parallel.rows, false)));
}

TEST(PlantedSweep, CsvAndJsonCarrySameValues) {
    const SweepResult res = run_planted_sweep(small_sweep());
    const Table t = to_table(res.rows, false);
    const auto j = table_to_json(t);
    ASSERT_EQ(j.size(), t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        for (std::size_t c = 0; c < t.columns.size(); ++c)
            EXPECT_EQ(j[r][t.columns[c]], cell_to_json(t.rows[r][c]));
    EXPECT_EQ(std::find(t.columns.begin(), t.columns.end(), "wall_time_s"), t.columns.end());
    const Table timed = to_table(res.rows, true);
    EXPECT_NE(std::find(timed.columns.begin(), timed.columns.end(), "wall_time_s"), timed.columns.end());
}

TEST(PlantedSweep, SmallCliqueFailureIsReportedNotRaised) {
    ExperimentSpec spec;
    spec.sizes = {60};
    spec.clique_sizes = {3};
    spec.trials = 2;
    spec.solver.max_iterations = 50;
    const SweepResult res = run_planted_sweep(spec);
    ASSERT_EQ(res.aggregates.size(), 1u);
    EXPECT_GE(res.aggregates[0].recovery_probability, 0.0);
    EXPECT_LE(res.aggregates[0].recovery_probability, 1.0);
}

TEST(PlantedSweep, TrialErrorsBecomeRows) {
    ExperimentSpec spec;
    spec.sizes = {20};
    spec.clique_sizes = {5};
    spec.solver.rho = std::numeric_limits<double>::infinity(); // zero shrinkage step
    spec.solver.max_iterations = 5;
    const SweepResult res = run_planted_sweep(spec);
    ASSERT_EQ(res.rows.size(), 1u);
    EXPECT_EQ(res.rows[0].status, "error");
    EXPECT_FALSE(res.rows[0].error.empty());
    EXPECT_EQ(res.aggregates[0].completed, 0);
    EXPECT_TRUE(std::isnan(res.aggregates[0].mean_err_l));
}

TEST(RandomBatch, NearCompleteGraphFindsAlmostEverything) {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::random_batch;
    spec.sizes = {50};
    spec.p = 0.99;
    spec.trials = 3;
    spec.seed = 4;
    const auto rows = run_random_batch(spec);
    ASSERT_EQ(rows.size(), 3u);
    for (const auto& r : rows) {
        EXPECT_NE(r.status, "error") << r.error;
        EXPECT_GE(r.clique_size, 40u);
        EXPECT_LE(r.strict_size, r.clique_size);
        EXPECT_GE(r.strict_size, 1u);
    }
}

TEST(Dimacs, RunsFilesAndReportsMissingOnes) {
    const auto dir = std::filesystem::temp_directory_path() / "cliquedecomp_test_dimacs";
    std::filesystem::create_directories(dir);
    const auto path = dir / "k6.clq";
    {
        std::ofstream out(path);
        out << "c K6 plus an isolated vertex\np edge 7 15\n";
        for (int i = 1; i <= 6; ++i)
            for (int j = i + 1; j <= 6; ++j) out << "e " << i << ' ' << j << '\n';
    }
    ExperimentSpec spec;
    spec.kind = ExperimentKind::dimacs;
    spec.files = {path.string(), (dir / "absent.clq").string()};
    spec.solver.rho = 0.4;
    const auto rows = run_dimacs(spec);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].N, 7);
    EXPECT_EQ(rows[0].edges, 15);
    EXPECT_EQ(rows[0].rho, 0.4);
    EXPECT_EQ(rows[0].decomposition_size, 6u);
    EXPECT_TRUE(rows[0].clique_valid);
    EXPECT_EQ(rows[1].status, "error");
    std::filesystem::remove_all(dir);
}

TEST(Certify, RowsCarryAllChecks) {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::certify;
    spec.sizes = {40};
    spec.clique_sizes = {16};
    spec.trials = 2;
    spec.certificate.K = 20;
    spec.certificate.q = 0.4;
    const CertifyResult res = run_certify(spec);
    ASSERT_EQ(res.rows.size(), 2u);
    for (const auto& r : res.rows) {
        ASSERT_TRUE(r.report.has_value()) << r.error;
        EXPECT_EQ(r.report->checks.size(), certificate_check_names().size());
    }
    ASSERT_EQ(res.aggregates.size(), 1u);
    EXPECT_EQ(res.aggregates[0].completed, 2);
    EXPECT_EQ(res.aggregates[0].range_rate, 1.0);
    const Table t = to_table(res.rows);
    for (const auto& name : certificate_check_names())
        EXPECT_NE(std::find(t.columns.begin(), t.columns.end(), name), t.columns.end()) << name;
    const Table a = to_table(res.aggregates);
    EXPECT_NE(std::find(a.columns.begin(), a.columns.end(), "pass_rate"), a.columns.end());
}
