// Acceptance run: one PASS/FAIL/SKIP line per criterion, nonzero exit on
// any FAIL. Runs from the source root (seed file, stubs, configs).

#include "../support/fuzz.hpp"
#include "../support/gradcheck.hpp"
#include "../support/layers.hpp"

#include "neurotree/evolution/pareto.hpp"
#include "neurotree/io/config.hpp"
#include "neurotree/io/datasets.hpp"
#include "neurotree/nn/train.hpp"
#include "neurotree/preprocess/transforms.hpp"
#include "neurotree/runner/run_loop.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>

using namespace neurotree;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict = Verdict::Pass;
    std::string detail;
};

Outcome pass(std::string detail) { return {Verdict::Pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Verdict::Fail, std::move(detail)}; }

const gp::PrimitiveSet& pset()
{
    static const gp::PrimitiveSet ps = primitives::standard_primitive_set();
    return ps;
}

// 1 ------------------------------------------------------------------------

/// O(n^3) peeling: a front is every remaining point no remaining point
/// dominates.
std::vector<std::set<std::size_t>> brute_force_fronts(const std::vector<evolution::Point>& pts)
{
    std::vector<std::set<std::size_t>> fronts;
    std::set<std::size_t> remaining;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        remaining.insert(i);
    }
    while (!remaining.empty()) {
        std::set<std::size_t> front;
        for (auto i : remaining) {
            bool dominated = false;
            for (auto j : remaining) {
                bool no_worse = true;
                bool better = false;
                for (std::size_t k = 0; k < pts[i].size(); ++k) {
                    no_worse = no_worse && pts[j][k] <= pts[i][k];
                    better = better || pts[j][k] < pts[i][k];
                }
                if (no_worse && better) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) {
                front.insert(i);
            }
        }
        for (auto i : front) {
            remaining.erase(i);
        }
        fronts.push_back(std::move(front));
    }
    return fronts;
}

Outcome nsga2_correctness()
{
    Rng rng(20240601);
    std::size_t points_checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.index(200);
        const std::size_t dims = trial % 4 == 3 ? 3 : 2;
        // Coarse grid so ties and duplicates occur.
        const double grid = trial % 2 == 0 ? 10.0 : 1000.0;
        std::vector<evolution::Point> pts(n, evolution::Point(dims));
        for (auto& p : pts) {
            for (auto& v : p) {
                v = std::floor(rng.uniform(0.0, grid));
            }
        }
        const auto fast = evolution::fast_nondominated_sort(pts);
        const auto oracle = brute_force_fronts(pts);
        if (fast.size() != oracle.size()) {
            return fail(fmt::format("population {}: {} fronts vs {} from the oracle", trial, fast.size(),
                                    oracle.size()));
        }
        for (std::size_t f = 0; f < fast.size(); ++f) {
            if (std::set<std::size_t>(fast[f].begin(), fast[f].end()) != oracle[f]) {
                return fail(fmt::format("population {}: front {} differs from the oracle", trial, f));
            }
        }
        for (const auto& front : fast) {
            std::vector<evolution::Point> members;
            for (auto i : front) {
                members.push_back(pts[i]);
            }
            const auto d = evolution::crowding_distance(members);
            for (std::size_t k = 0; k < dims; ++k) {
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (const auto& m : members) {
                    lo = std::min(lo, m[k]);
                    hi = std::max(hi, m[k]);
                }
                for (std::size_t i = 0; i < members.size(); ++i) {
                    const bool boundary = members.size() <= 2 || (hi > lo && (members[i][k] == lo || members[i][k] == hi));
                    if (boundary && !std::isinf(d[i])) {
                        return fail(fmt::format("population {}: boundary point has finite crowding {}", trial, d[i]));
                    }
                }
            }
        }
        points_checked += n;
    }
    const auto d = evolution::crowding_distance({{1, 3}, {2, 2}, {3, 1}});
    const double inf = std::numeric_limits<double>::infinity();
    if (!(d[0] == inf && d[2] == inf && std::abs(d[1] - 2.0) < 1e-12)) {
        return fail(fmt::format("3-point crowding gave [{}, {}, {}]", d[0], d[1], d[2]));
    }
    return pass(fmt::format("100 populations, {} points match the brute-force oracle; crowding [inf, 2, inf]",
                            points_checked));
}

// 2 ------------------------------------------------------------------------

Outcome gradient_correctness()
{
    using namespace testing;
    using gp::Activation;
    using gp::Padding;
    using primitives::LayerKind;
    const LayerTree in = primitives::input_tree();
    struct Case {
        std::string name;
        LayerTree tree;
        nn::Shape input;
    };
    std::vector<Case> cases = {
        {"dense", dense(in, 5, Activation::TanH, 0.01), {6}},
        {"conv2d same", conv(in, 3, 3, 1, Padding::Same, Activation::TanH, 0.02), {5, 5, 2}},
        {"conv2d valid strided", conv(in, 3, 3, 2, Padding::Valid, Activation::ELU), {7, 7, 2}},
        {"dropout", dropout(dense(in, 6, Activation::TanH), 0.4), {4}},
        {"batchnorm", unary(LayerKind::BatchNorm, conv(in, 2, 3, 1, Padding::Same)), {4, 4, 2}},
        {"maxpool", maxpool(in, 2, Padding::Valid), {5, 5, 2}},
        {"maxpool same", maxpool(in, 3, Padding::Same), {5, 5, 2}},
        {"global max pool", unary(LayerKind::GlobalMaxPool, in), {3, 3, 4}},
        {"global avg pool", unary(LayerKind::GlobalAvgPool, in), {3, 3, 4}},
        {"concatenate", primitives::concat_apply(dense(in, 3, Activation::TanH), maxpool(in, 2, Padding::Valid)),
         {4, 4, 1}},
        {"pretrained stub", stub(in, gp::Pretrained::MobileNet), {8, 8, 3}},
    };
    for (auto a : gp::kActivations) {
        cases.push_back({"activation " + std::string(gp::to_string(a)), dense(dense(in, 5, a), 3, Activation::TanH),
                         {4}});
    }
    double worst = 0.0;
    std::size_t checked = 0;
    std::uint64_t seed = 101;
    for (const auto& c : cases) {
        const auto r = gradient_check(c.tree, c.input, 3, seed++);
        checked += r.checked;
        worst = std::max(worst, r.max_rel_error);
        if (r.checked == 0 || !(r.max_rel_error < 1e-4)) {
            return fail(fmt::format("{}: relative error {:.3g} at {}", c.name, r.max_rel_error, r.worst));
        }
    }
    return pass(fmt::format("{} cases, {} partials, worst relative error {:.2e}", cases.size(), checked, worst));
}

// 3 ------------------------------------------------------------------------

Outcome operator_closure()
{
    std::size_t changed = 0;
    for (auto op : evolution::kOperators) {
        const auto r = testing::operator_closure_fuzz(pset(), op, 10000, 7000 + static_cast<std::uint64_t>(op));
        if (r.type_violations || r.depth_violations) {
            return fail(fmt::format("{}: {} type / {} depth violations, first: {}", evolution::to_string(op),
                                    r.type_violations, r.depth_violations, r.first_failure));
        }
        changed += r.changed;
    }
    return pass(fmt::format("{} operators x 10000 applications, {} changed a tree, 0 violations",
                            evolution::kOperatorCount, changed));
}

// 4 ------------------------------------------------------------------------

Outcome rate_fidelity()
{
    evolution::EvolutionConfig cfg;
    const evolution::OperatorContext ctx{pset(), cfg.depth_limit};
    Rng rng(4242);
    std::vector<gp::Node> pool;
    for (int i = 0; i < 64; ++i) {
        pool.push_back(gp::generate_ramped(rng, pset(), evolution::kInitDepthMin, evolution::kInitDepthMax,
                                           gp::SemType::PredictionVector));
    }
    evolution::OperatorStats stats;
    constexpr int kAttempts = 10000;
    for (int i = 0; i < kAttempts; ++i) {
        const auto& a = pool[rng.index(pool.size())];
        const auto& b = pool[rng.index(pool.size())];
        evolution::create_offspring(a, b, cfg, ctx, rng, stats);
    }
    double worst = 0.0;
    for (auto op : evolution::kOperators) {
        const auto i = static_cast<std::size_t>(op);
        const double observed = double(stats.fired[i]) / kAttempts;
        const double gap = std::abs(observed - cfg.operator_rates[i]);
        worst = std::max(worst, gap);
        if (gap > 0.02) {
            return fail(fmt::format("{} fired at {:.4f}, configured {:.2f}", evolution::to_string(op), observed,
                                    cfg.operator_rates[i]));
        }
    }
    return pass(fmt::format("{} attempts, largest deviation {:.4f}", kAttempts, worst));
}

// 5 ------------------------------------------------------------------------

Outcome early_stopping()
{
    const std::vector<double> sequence = {1.0, 0.9, 0.95, 0.96, 0.97};
    auto net = nn::compile<float>(testing::dense(primitives::input_tree(), 3, gp::Activation::ReLU), {4}, 2,
                                  {.seed = 1});
    LabeledSplit train;
    Rng rng(5);
    train.instances = nn::Tensor<float>({24, 4});
    for (auto& v : train.instances.values) {
        v = static_cast<float>(rng.normal());
    }
    for (std::size_t i = 0; i < 24; ++i) {
        train.labels.push_back(static_cast<std::int32_t>(i % 2));
    }
    nn::TrainConfig cfg;
    cfg.patience = 2;
    cfg.max_epochs = 50;
    cfg.batch_size = 4;
    std::size_t calls = 0;
    nn::Snapshot<float> at_best;
    const auto report = nn::train(net, train, cfg, 9, [&](nn::Network<float>& n) {
        if (calls == 1) {
            at_best = n.snapshot();
        }
        return calls < sequence.size() ? sequence[calls++] : 0.0;
    });
    const int stop_index = report.epochs_run - 1;
    const bool restored = report.restored && net.snapshot().parameters == at_best.parameters;
    if (stop_index != 3 || report.best_epoch != 1 || !restored) {
        return fail(fmt::format("stopped after epoch index {}, best_epoch {}, restored {}", stop_index,
                                report.best_epoch, restored));
    }
    return pass("stopped after epoch index 3, best_epoch 1, best weights restored");
}

// 6 ------------------------------------------------------------------------

struct DeskRun {
    runner::LoopResult result;
    std::vector<std::string> archive;
};

std::string describe(const gp::Individual& ind)
{
    return fmt::format("{} {} {} {}", ind.id, gp::to_expression(ind.root), ind.objectives->error_rate,
                       ind.objectives->param_count);
}

runner::LoopOptions desk_options(const io::RunConfig& config)
{
    runner::LoopOptions o;
    o.evolution = config.evolution;
    o.dataset_id = io::canonical_dataset_id(config.dataset_id);
    o.train_seed = config.train_seed;
    o.workers = 1;
    o.timeout_seconds = config.timeout;
    o.config_fingerprint = io::run_fingerprint(config);
    return o;
}

DeskRun desk_run(const io::RunConfig& config, const runner::LoopOptions& options,
                 std::optional<runner::Checkpoint> resume = std::nullopt)
{
    runner::EvalRunner eval(pset(), config.training,
                            std::make_shared<const nn::StubRegistry>(nn::StubRegistry::load(config.stubs_dir)));
    const auto seeds = evolution::read_seed_file(config.seed_file, pset());
    DeskRun run{runner::run_evolution(eval, pset(), seeds, options, std::move(resume)), {}};
    for (const auto& m : run.result.state.archive.members()) {
        run.archive.push_back(describe(m));
    }
    return run;
}

/// Everything but wall-clock time.
bool same_trajectory(const evolution::EvolutionState& a, const evolution::EvolutionState& b, std::string& why)
{
    if (a.history.size() != b.history.size()) {
        why = "history lengths differ";
        return false;
    }
    for (std::size_t g = 0; g < a.history.size(); ++g) {
        const auto& x = a.history[g];
        const auto& y = b.history[g];
        if (x.generation != y.generation || x.evaluated != y.evaluated || x.cache_hits != y.cache_hits ||
            x.best_error != y.best_error || x.archive_size != y.archive_size || x.hypervolume != y.hypervolume ||
            x.operators.fired != y.operators.fired || x.operators.changed != y.operators.changed) {
            why = fmt::format("generation {} log differs", g);
            return false;
        }
    }
    if (a.population.size() != b.population.size()) {
        why = "population sizes differ";
        return false;
    }
    for (std::size_t i = 0; i < a.population.size(); ++i) {
        if (describe(a.population[i]) != describe(b.population[i]) ||
            a.population[i].parent_ids != b.population[i].parent_ids) {
            why = fmt::format("population member {} differs", i);
            return false;
        }
    }
    if (!(a.rng == b.rng) || a.next_id != b.next_id) {
        why = "rng state or id counter differs";
        return false;
    }
    return true;
}

Outcome desk_evolution()
{
    const auto config = io::load_run_config("data/configs/acceptance.ini");
    if (config.evolution.pop_size != 16 || config.evolution.generations != 20 ||
        !config.dataset_id.starts_with("blobs")) {
        return fail("data/configs/acceptance.ini must describe pop 16, 20 generations on blobs");
    }
    const auto options = desk_options(config);
    const auto first = desk_run(config, options);
    const auto second = desk_run(config, options);
    const auto& h = first.result.state.history;

    if (evolution::read_seed_file(config.seed_file, pset()).size() != 16 || h.front().evaluated != 16) {
        return fail(fmt::format("initial population evaluated {} individuals, expected the 16 seeds",
                                h.front().evaluated));
    }
    for (std::size_t g = 1; g < h.size(); ++g) {
        if (h[g].hypervolume < h[g - 1].hypervolume) {
            return fail(fmt::format("hypervolume fell at generation {}: {} -> {}", g, h[g - 1].hypervolume,
                                    h[g].hypervolume));
        }
    }
    if (h.size() != 21) {
        return fail(fmt::format("{} generations logged, expected 0..20", h.size()));
    }
    if (!(h.back().best_error < h.front().best_error)) {
        return fail(fmt::format("best error did not improve: {} at generation 0, {} at 20", h.front().best_error,
                                h.back().best_error));
    }
    std::string why;
    if (first.archive != second.archive || !same_trajectory(first.result.state, second.result.state, why)) {
        return fail("second execution diverged: " + (why.empty() ? std::string("archives differ") : why));
    }
    return pass(fmt::format("best error {:.4f} -> {:.4f}, hypervolume monotone over 20 generations, archive of {} "
                            "reproduced bit-exactly",
                            h.front().best_error, h.back().best_error, first.archive.size()));
}

// 7 ------------------------------------------------------------------------

DataPair one_instance(const nn::Shape& shape, std::vector<float> values)
{
    DataPair d;
    d.n_classes = 2;
    nn::Shape dims = shape;
    dims.insert(dims.begin(), 1);
    d.train.instances = nn::Tensor<float>(dims, std::move(values));
    d.train.labels = {0};
    d.validation = d.train;
    d.test = d.train;
    return d;
}

Outcome preprocessing_oracles()
{
    const auto hann = preprocess::cosine_window(one_instance({1, 3, 1}, {5, 7, 9}));
    if (hann.train.instances.values != std::vector<float>{0, 7, 0}) {
        return fail("Hann window on [5, 7, 9] did not give [0, 7, 0]");
    }
    Rng rng(77);
    {
        const std::size_t h = 6, w = 7, c = 2;
        std::vector<float> img(h * w * c);
        for (auto& v : img) {
            v = static_cast<float>(rng.uniform(0.5, 1.5));
        }
        const auto win = preprocess::cosine_window(one_instance({h, w, c}, img));
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const bool border = y == 0 || x == 0 || y == h - 1 || x == w - 1;
                for (std::size_t k = 0; k < c; ++k) {
                    if (border && win.train.instances.values[(y * w + x) * c + k] != 0.0f) {
                        return fail("cosine window left a nonzero border pixel");
                    }
                }
            }
        }
    }
    double worst_dct = 0.0;
    for (auto [h, w] : {std::pair<std::size_t, std::size_t>{4, 4}, {5, 7}, {8, 3}, {1, 6}}) {
        std::vector<double> x(h * w);
        for (auto& v : x) {
            v = rng.uniform(-1.0, 1.0);
        }
        const auto X = preprocess::dct2(x, h, w);
        const auto back = preprocess::idct2(X, h, w);
        double e_in = 0.0, e_out = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            worst_dct = std::max(worst_dct, std::abs(back[i] - x[i]));
            e_in += x[i] * x[i];
            e_out += X[i] * X[i];
        }
        worst_dct = std::max(worst_dct, std::abs(e_in - e_out));
    }
    if (!(worst_dct < 1e-5)) {
        return fail(fmt::format("DCT round trip / Parseval error {:.3g}", worst_dct));
    }

    // Train drawn from one range, held-out splits from a shifted one.
    DataPair d;
    d.n_classes = 2;
    const auto fill = [&](std::size_t n, double lo, double hi) {
        LabeledSplit s;
        s.instances = nn::Tensor<float>({n, 3, 3, 2});
        for (auto& v : s.instances.values) {
            v = static_cast<float>(rng.uniform(lo, hi));
        }
        s.labels.assign(n, 0);
        return s;
    };
    d.train = fill(20, -1.0, 2.0);
    d.validation = fill(6, 5.0, 9.0);
    d.test = fill(6, 5.0, 9.0);
    const auto n = preprocess::normalize_fit_apply(d);
    const auto stats = preprocess::fit_normalize(n.train);
    for (std::size_t c = 0; c < stats.mean.size(); ++c) {
        if (!(std::abs(stats.mean[c]) < 1e-5 && std::abs(stats.stddev[c] - 1.0) < 1e-5)) {
            return fail(fmt::format("normalized train channel {} has mean {} std {}", c, stats.mean[c],
                                    stats.stddev[c]));
        }
    }
    DataPair perturbed = d;
    for (auto& v : perturbed.test.instances.values) {
        v += 100.0f;
    }
    for (auto& v : perturbed.validation.instances.values) {
        v *= -3.0f;
    }
    const auto np = preprocess::normalize_fit_apply(perturbed);
    if (!(np.train == n.train) || !(preprocess::fit_normalize(n.test).mean[0] > 1.0)) {
        return fail("normalization statistics depend on held-out splits");
    }
    return pass(fmt::format("Hann [5,7,9] -> [0,7,0], zero borders; DCT error {:.1e}; train-only normalization",
                            worst_dct));
}

// 8 ------------------------------------------------------------------------

Outcome cifar_loader()
{
    const char* env = std::getenv("NEUROTREE_CIFAR10_DIR");
    const std::filesystem::path dir = env ? env : "data/cifar-10-batches-bin";
    if (!std::filesystem::is_regular_file(dir / "test_batch.bin")) {
        return {Verdict::Skip, "no CIFAR-10 binaries in " + dir.string() + " (set NEUROTREE_CIFAR10_DIR)"};
    }
    const auto data = io::load_cifar10(dir, 0.1, 0);
    const std::size_t train = data.train.size() + data.validation.size();
    if (train != 50000 || data.test.size() != 10000) {
        return fail(fmt::format("{} train + {} test instances", train, data.test.size()));
    }
    std::vector<std::size_t> counts(10, 0);
    for (const auto* split : {&data.train, &data.validation, &data.test}) {
        for (auto l : split->labels) {
            ++counts.at(static_cast<std::size_t>(l));
        }
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] != 6000) {
            return fail(fmt::format("class {} appears {} times", k, counts[k]));
        }
    }
    const auto truncated = std::filesystem::temp_directory_path() / "neurotree_truncated_batch.bin";
    {
        std::ifstream in(dir / "test_batch.bin", std::ios::binary);
        std::string bytes(io::kCifarRecordBytes * 2 - 1, '\0');
        in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        std::ofstream(truncated, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    try {
        io::read_cifar10_batch(truncated);
        return fail("truncated batch file was accepted");
    } catch (const io::TruncatedRecord&) {
    }
    return pass("50000 train / 10000 test, 6000 per class, truncated file rejected");
}

// 9 ------------------------------------------------------------------------

Outcome checkpoint_resume()
{
    auto config = io::load_run_config("data/configs/acceptance.ini");
    config.evolution.generations = 10;
    const auto options = desk_options(config);
    const auto straight = desk_run(config, options);

    const auto ckpt = std::filesystem::temp_directory_path() / "neurotree_acceptance_resume.ckpt";
    std::filesystem::remove(ckpt);
    auto first = options;
    first.stop_after = 5;
    first.checkpoint_path = ckpt;
    const auto half = desk_run(config, first);
    if (half.result.state.generation != 5) {
        return fail(fmt::format("first segment stopped at generation {}", half.result.state.generation));
    }
    const auto resumed = desk_run(config, options, runner::read_checkpoint(ckpt, pset()));
    std::string why;
    if (resumed.archive != straight.archive) {
        return fail("final archives differ");
    }
    if (!same_trajectory(resumed.result.state, straight.result.state, why)) {
        return fail("resumed run differs: " + why);
    }
    return pass(fmt::format("5 + 5 generations reproduce 10 uninterrupted (archive of {})", straight.archive.size()));
}

struct Criterion {
    int number;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::warn);
    const std::vector<Criterion> criteria = {
        {1, "NSGA-II sorting and crowding", 10, nsga2_correctness},
        {2, "gradient correctness", 60, gradient_correctness},
        {3, "operator closure fuzz", 60, operator_closure},
        {4, "operator rate fidelity", 0, rate_fidelity},
        {5, "early stopping contract", 0, early_stopping},
        {6, "end-to-end desk evolution", 900, desk_evolution},
        {7, "preprocessing oracles", 0, preprocessing_oracles},
        {8, "CIFAR-10 loader", 0, cifar_loader},
        {9, "checkpoint/resume equivalence", 0, checkpoint_resume},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = fail(std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (out.verdict == Verdict::Pass && c.budget_seconds > 0 && seconds >= c.budget_seconds) {
            out = fail(fmt::format("took {:.1f}s, budget {:.0f}s; {}", seconds, c.budget_seconds, out.detail));
        }
        const char* tag = out.verdict == Verdict::Pass ? "PASS" : out.verdict == Verdict::Skip ? "SKIP" : "FAIL";
        failures += out.verdict == Verdict::Fail ? 1 : 0;
        std::cout << fmt::format("[{}] {}. {} ({:.1f}s): {}", tag, c.number, c.name, seconds, out.detail)
                  << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed or skipped" : fmt::format("{} criteria failed", failures))
              << std::endl;
    return failures == 0 ? 0 : 1;
}
