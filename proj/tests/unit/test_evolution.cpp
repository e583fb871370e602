#include "neurotree/evolution/evolution.hpp"
#include "neurotree/gp/expression.hpp"
#include "neurotree/gp/generate.hpp"
#include "neurotree/primitives/library.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace neurotree;
using namespace neurotree::evolution;

namespace {

const gp::PrimitiveSet& pset()
{
    static const gp::PrimitiveSet ps = primitives::standard_primitive_set();
    return ps;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h = (h ^ c) * 1099511628211ull;
    }
    return h;
}

/// Deterministic stand-in for training: error from the expression hash,
/// size from the node count.
BatchOutcome fake_evaluate(const std::vector<gp::Individual>& inds)
{
    BatchOutcome out;
    for (const auto& ind : inds) {
        const auto h = fnv1a(gp::to_expression(ind.root));
        out.objectives.push_back({double(h % 1000) / 1000.0, static_cast<std::int64_t>(gp::node_count(ind.root) * 10)});
    }
    return out;
}

struct Run {
    EvolutionState state;
    std::vector<std::string> final_archive;
};

Run run(const EvolutionConfig& cfg, std::size_t generations)
{
    Run r{initialize(read_seed_file("data/seeds.txt", pset()), pset(), cfg, fake_evaluate), {}};
    for (std::size_t g = 0; g < generations; ++g) {
        generation_step(r.state, pset(), cfg, fake_evaluate);
    }
    for (const auto& m : r.state.archive.members()) {
        r.final_archive.push_back(gp::to_expression(m.root));
    }
    return r;
}

} // namespace

TEST_CASE("default rates follow the published table")
{
    const auto r = default_operator_rates();
    const auto rate = [&](OperatorId op) { return r[static_cast<std::size_t>(op)]; };
    CHECK(rate(OperatorId::Crossover) == 0.5);
    CHECK(rate(OperatorId::CrossoverEphemeral) == 0.5);
    CHECK(rate(OperatorId::HeadlessChicken) == 0.1);
    CHECK(rate(OperatorId::HeadlessChickenEphemeral) == 0.1);
    CHECK(rate(OperatorId::Insert) == 0.05);
    CHECK(rate(OperatorId::InsertModify) == 0.1);
    CHECK(rate(OperatorId::Ephemeral) == 0.25);
    for (auto op : {OperatorId::Uniform, OperatorId::Shrink, OperatorId::SwapLayer, OperatorId::RemoveLayer,
                    OperatorId::AddLayer, OperatorId::CrossoverPreserving, OperatorId::MutateActivation,
                    OperatorId::MutateOptimizer, OperatorId::MutatePretrained}) {
        CHECK(rate(op) == 0.05);
    }
}

TEST_CASE("config validation rejects out-of-range values")
{
    EvolutionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.parents() == 32);
    cfg.operator_rates[3] = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EvolutionConfig{};
    cfg.pop_size = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EvolutionConfig{};
    cfg.n_select = 65;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = EvolutionConfig{};
    cfg.depth_limit = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("seeded population puts the seeds first")
{
    const auto seeds = read_seed_file("data/seeds.txt", pset());
    REQUIRE(seeds.size() == 16);
    EvolutionConfig cfg;
    cfg.pop_size = 24;
    Rng rng(0);
    std::uint64_t next_id = 100;
    const auto pop = seed_population(seeds, pset(), cfg, rng, next_id);
    REQUIRE(pop.size() == 24);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        CHECK(pop[i].id == 100 + i);
        CHECK(pop[i].origin == (i < 16 ? gp::Origin::Seed : gp::Origin::Random));
        CHECK_FALSE(pop[i].evaluated());
        CHECK(gp::validate_types(pop[i].root, pset(), gp::SemType::PredictionVector).ok());
    }
    CHECK(pop[3].root == seeds[3]);
    CHECK(next_id == 124);

    cfg.pop_size = 10;
    CHECK(seed_population(seeds, pset(), cfg, rng, next_id).size() == 10);
}

TEST_CASE("seed parse errors name the line")
{
    std::istringstream in("# header\n\nNNLearner(data, InputLayer(), adam, 4)\nNNLearner(data, Bogus(), adam, 4)\n");
    try {
        parse_seed_lines(in, pset(), "seeds.txt");
        FAIL("expected SeedParseError");
    } catch (const SeedParseError& e) {
        CHECK(e.line == 4);
        CHECK(std::string(e.what()).starts_with("seeds.txt:4: "));
    }
    std::istringstream wrong_root("DenseLayer(InputLayer(), 4, relu, 0.0)\n");
    CHECK_THROWS_AS(parse_seed_lines(wrong_root, pset(), "x"), SeedParseError);
    CHECK_THROWS_AS(read_seed_file("data/no_such_file.txt", pset()), SeedParseError);
}

TEST_CASE("operators fire at their configured rates")
{
    EvolutionConfig cfg;
    const OperatorContext ctx{pset(), cfg.depth_limit};
    Rng rng(2024);
    std::vector<gp::Node> pool;
    for (int i = 0; i < 64; ++i) {
        pool.push_back(gp::generate_ramped(rng, pset(), 2, 6, gp::SemType::PredictionVector));
    }
    OperatorStats stats;
    constexpr int kAttempts = 10000;
    for (int i = 0; i < kAttempts; ++i) {
        const auto& a = pool[rng.index(pool.size())];
        const auto& b = pool[rng.index(pool.size())];
        const auto child = create_offspring(a, b, cfg, ctx, rng, stats);
        REQUIRE(gp::validate_types(child, pset(), gp::SemType::PredictionVector).ok());
        REQUIRE(gp::depth(child) <= cfg.depth_limit);
    }
    CHECK(stats.attempts == kAttempts);
    for (auto op : kOperators) {
        const auto i = static_cast<std::size_t>(op);
        const double observed = double(stats.fired[i]) / kAttempts;
        CHECK_MESSAGE(std::abs(observed - cfg.operator_rates[i]) <= 0.02, to_string(op), " fired ", observed);
        CHECK(stats.changed[i] <= stats.fired[i]);
    }
}

TEST_CASE("generations keep size, grow the archive monotonically and replay exactly")
{
    EvolutionConfig cfg;
    cfg.pop_size = 16;
    cfg.rng_seed = 5;
    const Run a = run(cfg, 12);
    REQUIRE(a.state.history.size() == 13);
    CHECK(a.state.history[0].evaluated == 16);
    double hv = -1.0;
    double best = 2.0;
    for (const auto& log : a.state.history) {
        CHECK(log.hypervolume >= hv);
        CHECK(log.best_error <= best);
        hv = log.hypervolume;
        best = log.best_error;
    }
    CHECK(a.state.population.size() == 16);
    CHECK(a.state.generation == 12);
    CHECK(a.state.history[3].evaluated == 8);
    CHECK(a.state.history[3].operators.attempts == 8);

    const auto& members = a.state.archive.members();
    for (const auto& x : members) {
        for (const auto& y : members) {
            CHECK_FALSE(neurotree::dominates(*x.objectives, *y.objectives));
        }
    }
    for (const auto& ind : a.state.population) {
        CHECK(ind.evaluated());
        CHECK(gp::validate_types(ind.root, pset(), gp::SemType::PredictionVector).ok());
    }

    const Run b = run(cfg, 12);
    CHECK(a.final_archive == b.final_archive);
    CHECK(a.state.rng == b.state.rng);
    CHECK(a.state.next_id == b.state.next_id);
    for (std::size_t g = 0; g < a.state.history.size(); ++g) {
        CHECK(a.state.history[g].best_error == b.state.history[g].best_error);
        CHECK(a.state.history[g].archive_size == b.state.history[g].archive_size);
        CHECK(a.state.history[g].operators.fired == b.state.history[g].operators.fired);
    }

    cfg.rng_seed = 6;
    CHECK(run(cfg, 12).final_archive != a.final_archive);
}

TEST_CASE("offspring record their lineage")
{
    EvolutionConfig cfg;
    cfg.pop_size = 16;
    Run r = run(cfg, 3);
    std::set<std::uint64_t> ids;
    for (const auto& ind : r.state.population) {
        CHECK(ids.insert(ind.id).second);
        if (ind.origin == gp::Origin::Seed) {
            CHECK(ind.parent_ids.empty());
        } else {
            CHECK_FALSE(ind.parent_ids.empty());
            CHECK(ind.parent_ids.size() <= 2);
            for (auto p : ind.parent_ids) {
                CHECK(p < ind.id);
            }
        }
    }
}
