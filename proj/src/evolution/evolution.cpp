#include "neurotree/evolution/evolution.hpp"

#include "neurotree/gp/expression.hpp"
#include "neurotree/gp/generate.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <fstream>

namespace neurotree::evolution {

OperatorRates default_operator_rates()
{
    OperatorRates r{};
    r.fill(0.05);
    r[static_cast<std::size_t>(OperatorId::Crossover)] = 0.5;
    r[static_cast<std::size_t>(OperatorId::CrossoverEphemeral)] = 0.5;
    r[static_cast<std::size_t>(OperatorId::HeadlessChicken)] = 0.1;
    r[static_cast<std::size_t>(OperatorId::HeadlessChickenEphemeral)] = 0.1;
    r[static_cast<std::size_t>(OperatorId::InsertModify)] = 0.1;
    r[static_cast<std::size_t>(OperatorId::Ephemeral)] = 0.25;
    return r;
}

void EvolutionConfig::validate() const
{
    if (pop_size < 2) {
        throw std::invalid_argument("pop_size must be >= 2");
    }
    if (parents() < 1 || parents() > pop_size) {
        throw std::invalid_argument("n_select must lie in [1, pop_size]");
    }
    for (auto op : kOperators) {
        const double r = operator_rates[static_cast<std::size_t>(op)];
        if (!(r >= 0.0 && r <= 1.0)) {
            throw std::invalid_argument("rate of " + std::string(to_string(op)) + " must lie in [0, 1]");
        }
    }
    if (depth_limit < kInitDepthMax) {
        throw std::invalid_argument("depth_limit must be >= " + std::to_string(kInitDepthMax));
    }
    if (max_params < 1) {
        throw std::invalid_argument("max_params must be >= 1");
    }
}

std::vector<gp::Node> parse_seed_lines(std::istream& in, const gp::PrimitiveSet& pset, const std::string& source)
{
    std::vector<gp::Node> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        try {
            out.push_back(gp::parse_expression(line, pset, gp::SemType::PredictionVector));
        } catch (const gp::ParseError& e) {
            throw SeedParseError(source, line_no, e.what());
        }
    }
    return out;
}

std::vector<gp::Node> read_seed_file(const std::filesystem::path& path, const gp::PrimitiveSet& pset)
{
    std::ifstream in(path);
    if (!in) {
        throw SeedParseError(path.string(), 0, "cannot open seed file");
    }
    return parse_seed_lines(in, pset, path.string());
}

std::vector<gp::Individual> seed_population(const std::vector<gp::Node>& seeds, const gp::PrimitiveSet& pset,
                                            const EvolutionConfig& cfg, Rng& rng, std::uint64_t& next_id)
{
    std::vector<gp::Individual> pop;
    pop.reserve(cfg.pop_size);
    if (seeds.size() > cfg.pop_size) {
        spdlog::warn("{} seeds exceed pop_size {}; keeping the first {}", seeds.size(), cfg.pop_size, cfg.pop_size);
    }
    for (const auto& s : seeds) {
        if (pop.size() == cfg.pop_size) {
            break;
        }
        gp::Individual ind;
        ind.root = s;
        ind.id = next_id++;
        ind.origin = gp::Origin::Seed;
        pop.push_back(std::move(ind));
    }
    while (pop.size() < cfg.pop_size) {
        gp::Individual ind;
        ind.root = gp::generate_ramped(rng, pset, kInitDepthMin, kInitDepthMax, gp::SemType::PredictionVector);
        ind.id = next_id++;
        ind.origin = gp::Origin::Random;
        pop.push_back(std::move(ind));
    }
    return pop;
}

OperatorStats& OperatorStats::operator+=(const OperatorStats& o)
{
    for (std::size_t i = 0; i < kOperatorCount; ++i) {
        fired[i] += o.fired[i];
        changed[i] += o.changed[i];
    }
    attempts += o.attempts;
    return *this;
}

gp::Node create_offspring(const gp::Node& parent, const gp::Node& mate, const EvolutionConfig& cfg,
                          const OperatorContext& ctx, Rng& rng, OperatorStats& stats)
{
    ++stats.attempts;
    gp::Node current = parent;
    for (auto op : kOperators) {
        const auto i = static_cast<std::size_t>(op);
        if (!rng.bernoulli(cfg.operator_rates[i])) {
            continue;
        }
        ++stats.fired[i];
        auto next = apply_operator(op, current, mate, ctx, rng);
        if (next && !(*next == current)) {
            ++stats.changed[i];
            current = std::move(*next);
        }
    }
    return current;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t evaluate_into(std::vector<gp::Individual>& inds, const Evaluator& evaluate)
{
    BatchOutcome out = evaluate(inds);
    if (out.objectives.size() != inds.size()) {
        throw std::logic_error("evaluator returned " + std::to_string(out.objectives.size()) + " results for " +
                               std::to_string(inds.size()) + " requests");
    }
    for (std::size_t i = 0; i < inds.size(); ++i) {
        inds[i].objectives = out.objectives[i];
    }
    return out.cache_hits;
}

void finish_log(GenerationLog& log, const EvolutionState& state, const EvolutionConfig& cfg)
{
    log.generation = state.generation;
    log.best_error = state.archive.best_error();
    log.archive_size = state.archive.size();
    log.hypervolume = state.archive.hypervolume(cfg.reference_point());
}

} // namespace

EvolutionState initialize(const std::vector<gp::Node>& seeds, const gp::PrimitiveSet& pset,
                          const EvolutionConfig& cfg, const Evaluator& evaluate)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    EvolutionState state;
    state.rng = Rng(cfg.rng_seed);
    state.population = seed_population(seeds, pset, cfg, state.rng, state.next_id);
    GenerationLog log;
    log.cache_hits = evaluate_into(state.population, evaluate);
    log.evaluated = state.population.size();
    for (const auto& ind : state.population) {
        state.archive.update(ind);
    }
    finish_log(log, state, cfg);
    log.wall_seconds = seconds_since(t0);
    state.history.push_back(log);
    return state;
}

GenerationLog generation_step(EvolutionState& state, const gp::PrimitiveSet& pset, const EvolutionConfig& cfg,
                              const Evaluator& evaluate)
{
    const auto t0 = std::chrono::steady_clock::now();
    const OperatorContext ctx{pset, cfg.depth_limit};
    auto& pop = state.population;

    auto parents = nsga2_select(pop, cfg.parents());
    state.rng.shuffle(parents);

    GenerationLog log;
    std::vector<gp::Individual> offspring;
    offspring.reserve(parents.size());
    for (std::size_t i = 0; i < parents.size(); ++i) {
        const std::size_t mate_slot = (i ^ 1) < parents.size() ? (i ^ 1) : 0;
        const gp::Individual& parent = pop[parents[i]];
        const gp::Individual& mate = pop[parents[mate_slot]];
        OperatorStats attempt;
        gp::Individual child;
        child.root = create_offspring(parent.root, mate.root, cfg, ctx, state.rng, attempt);
        child.id = state.next_id++;
        child.parent_ids = {parent.id};
        child.origin = gp::Origin::Mutation;
        for (auto op : kOperators) {
            if (is_mating(op) && attempt.changed[static_cast<std::size_t>(op)] > 0) {
                child.origin = gp::Origin::Crossover;
            }
        }
        if (child.origin == gp::Origin::Crossover && mate.id != parent.id) {
            child.parent_ids.push_back(mate.id);
        }
        log.operators += attempt;
        offspring.push_back(std::move(child));
    }

    log.cache_hits = evaluate_into(offspring, evaluate);
    log.evaluated = offspring.size();
    for (const auto& ind : offspring) {
        state.archive.update(ind);
    }

    std::vector<gp::Individual> combined = std::move(pop);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
    std::vector<gp::Individual> survivors;
    survivors.reserve(cfg.pop_size);
    for (auto idx : nsga2_select(combined, std::min(cfg.pop_size, combined.size()))) {
        survivors.push_back(std::move(combined[idx]));
    }
    pop = std::move(survivors);

    ++state.generation;
    finish_log(log, state, cfg);
    log.wall_seconds = seconds_since(t0);
    state.history.push_back(log);
    return log;
}

} // namespace neurotree::evolution
