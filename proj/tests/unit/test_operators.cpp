#include "neurotree/evolution/operators.hpp"
#include "neurotree/primitives/library.hpp"

#include "../support/fuzz.hpp"

#include <doctest.h>

#include <cmath>
#include <deque>
#include <map>
#include <set>

using namespace neurotree;
using namespace neurotree::evolution;
using gp::Node;

namespace {

const gp::PrimitiveSet& pset()
{
    static const gp::PrimitiveSet ps = primitives::standard_primitive_set();
    return ps;
}

const OperatorContext& ctx()
{
    static const OperatorContext c{pset(), kDefaultDepthLimit};
    return c;
}

Node parse(const std::string& text) { return gp::parse_expression(text, pset()); }

std::string dense(const std::string& inner, int units)
{
    return "DenseLayer(" + inner + ", " + std::to_string(units) + ", relu, 0.0)";
}

std::string learner(const std::string& layers) { return "NNLearner(data, " + layers + ", adam, 4)"; }

std::vector<std::string> tokens(const std::string& expr)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : expr) {
        if (c == '(' || c == ')' || c == ',' || c == ' ') {
            if (!cur.empty()) {
                out.push_back(cur);
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

/// Positions at which two token lists of equal length differ; -1 entry when
/// lengths differ.
std::vector<long> token_diff(const Node& a, const Node& b)
{
    const auto ta = tokens(gp::to_expression(a));
    const auto tb = tokens(gp::to_expression(b));
    if (ta.size() != tb.size()) {
        return {-1};
    }
    std::vector<long> out;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i] != tb[i]) {
            out.push_back(static_cast<long>(i));
        }
    }
    return out;
}

std::multiset<std::string> layer_names(const Node& root)
{
    std::multiset<std::string> out;
    for (const auto& p : layer_paths(root)) {
        out.insert(gp::node_at(root, p).primitive->name);
    }
    return out;
}

Node random_learner(Rng& rng) { return gp::generate_ramped(rng, pset(), 2, 6, gp::SemType::PredictionVector); }

/// Chain of layer primitive names from the input upwards, for single-branch
/// networks.
std::vector<std::string> chain_of(const Node& root)
{
    std::vector<std::string> out;
    const Node* n = &root.children[1];
    while (!n->children.empty()) {
        out.push_back(n->primitive->name);
        n = &n->children[0];
    }
    std::reverse(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("one-point crossover reproduces the two-chain example")
{
    const Node a = parse(learner(dense(dense(dense("InputLayer()", 1), 2), 3)));
    const Node b = parse(learner(dense(dense("InputLayer()", 11), 12)));
    // Cut above L1 in a and below M2 in b.
    const auto [c1, c2] = crossover_at(a, {1, 0, 0}, b, {1, 0});
    CHECK(gp::to_expression(c1) == learner(dense(dense(dense("InputLayer()", 11), 2), 3)));
    CHECK(gp::to_expression(c2) == learner(dense(dense("InputLayer()", 1), 12)));
    CHECK(gp::node_count(c1) + gp::node_count(c2) == gp::node_count(a) + gp::node_count(b));
    CHECK_THROWS_AS(crossover_at(a, {3}, b, {1}), std::invalid_argument);
}

TEST_CASE("random crossovers conserve nodes and stay type-sound")
{
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const Node a = random_learner(rng);
        const Node b = random_learner(rng);
        auto out = crossover_one_point(a, b, ctx(), rng);
        REQUIRE(out.has_value());
        CHECK(gp::node_count(out->first) + gp::node_count(out->second) == gp::node_count(a) + gp::node_count(b));
        CHECK(gp::validate_types(out->first, pset(), gp::SemType::PredictionVector).ok());
        CHECK(gp::validate_types(out->second, pset(), gp::SemType::PredictionVector).ok());
    }
}

TEST_CASE("preserving crossover grows each child by the donated subtree")
{
    const Node a = parse(learner(dense(dense("InputLayer()", 1), 2)));
    const Node b = parse(learner(dense("InputLayer()", 11)));
    const auto [c1, c2] = crossover_preserving_at(a, {1, 0}, b, {1}, pset());
    CHECK(gp::to_expression(c1) ==
          learner(dense("ConcatenateLayer(" + dense("InputLayer()", 1) + ", " + dense("InputLayer()", 11) + ")", 2)));

    Rng rng(2);
    for (int i = 0; i < 300; ++i) {
        const Node x = random_learner(rng);
        const Node y = random_learner(rng);
        const auto px = layer_paths(x);
        const auto py = layer_paths(y);
        const auto& cx = px[rng.index(px.size())];
        const auto& cy = py[rng.index(py.size())];
        const auto [k1, k2] = crossover_preserving_at(x, cx, y, cy, pset());
        CHECK(gp::node_count(k1) == gp::node_count(x) + gp::node_count(gp::node_at(y, cy)) + 1);
        CHECK(gp::node_count(k2) == gp::node_count(y) + gp::node_count(gp::node_at(x, cx)) + 1);
        const auto lx = layer_names(x);
        const auto l1 = layer_names(k1);
        CHECK(std::includes(l1.begin(), l1.end(), lx.begin(), lx.end()));
        CHECK(gp::validate_types(k1, pset(), gp::SemType::PredictionVector).ok());
    }
}

TEST_CASE("ephemeral crossover swaps constants between matching slots")
{
    const Node a = parse("NNLearner(data, DenseLayer(InputLayer(), 8, relu, 0.001), adam, 4)");
    const Node b = parse("NNLearner(data, DropoutLayer(InputLayer(), 0.3), sgd, 9)");
    Rng rng(0);
    for (int i = 0; i < 100; ++i) {
        auto out = crossover_ephemeral(a, b, ctx(), rng);
        REQUIRE(out.has_value());
        // Only batch size and optimizer slots are shared.
        const auto d = token_diff(a, out->first);
        REQUIRE(d.size() == 1);
        const auto t = tokens(gp::to_expression(out->first))[static_cast<std::size_t>(d[0])];
        CHECK((t == "sgd" || t == "9"));
    }
}

TEST_CASE("add then remove at the same point restores the layer count")
{
    Rng rng(4);
    const Node base = parse(learner(dense(dense("InputLayer()", 4), 8)));
    const auto& bn = *pset().find("BatchNormLayer");
    for (const auto& at : layer_paths(base)) {
        const Node grown = add_layer_at(base, at, bn, ctx(), rng);
        CHECK(layer_paths(grown).size() == layer_paths(base).size() + 1);
        CHECK(remove_layer_at(grown, at) == base);
    }
}

TEST_CASE("a learner's only layer is not removable")
{
    Rng rng(0);
    const Node one = parse(learner(dense("InputLayer()", 4)));
    CHECK_FALSE(mutate_remove_layer(one, ctx(), rng).has_value());
    CHECK_THROWS_AS(remove_layer_at(one, {1}), std::invalid_argument);
    CHECK_FALSE(mutate_remove_layer(parse(learner("InputLayer()")), ctx(), rng).has_value());
    CHECK_FALSE(mutate_swap_layer(parse(learner("InputLayer()")), ctx(), rng).has_value());
    const Node two = parse(learner(dense(dense("InputLayer()", 4), 8)));
    for (int i = 0; i < 20; ++i) {
        const auto out = mutate_remove_layer(two, ctx(), rng);
        REQUIRE(out.has_value());
        CHECK(layer_paths(*out).size() == 2);
    }
}

TEST_CASE("swap keeps structure and changes the layer kind")
{
    Rng rng(9);
    const Node base = parse(learner(dense(dense("InputLayer()", 4), 8)));
    for (int i = 0; i < 100; ++i) {
        const auto out = mutate_swap_layer(base, ctx(), rng);
        REQUIRE(out.has_value());
        CHECK(layer_paths(*out).size() == layer_paths(base).size());
        const auto names = layer_names(*out);
        CHECK(names.count("DenseLayer") == 1);
    }
}

TEST_CASE("add, swap and remove connect every short layer chain")
{
    const std::vector<std::string> kinds = {"DenseLayer", "BatchNormLayer", "DropoutLayer"};
    const auto build = [&](const std::vector<std::string>& chain) {
        std::string inner = "InputLayer()";
        for (const auto& k : chain) {
            if (k == "DenseLayer") {
                inner = dense(inner, 4);
            } else if (k == "DropoutLayer") {
                inner = "DropoutLayer(" + inner + ", 0.2)";
            } else {
                inner = "BatchNormLayer(" + inner + ")";
            }
        }
        return parse(learner(inner));
    };
    std::vector<std::vector<std::string>> all;
    for (std::size_t len = 1; len <= 3; ++len) {
        std::vector<std::size_t> idx(len, 0);
        while (true) {
            std::vector<std::string> chain;
            for (auto i : idx) {
                chain.push_back(kinds[i]);
            }
            all.push_back(chain);
            std::size_t k = 0;
            while (k < len && ++idx[k] == kinds.size()) {
                idx[k++] = 0;
            }
            if (k == len) {
                break;
            }
        }
    }
    REQUIRE(all.size() == 39);

    Rng rng(0);
    for (const auto& start : all) {
        std::set<std::vector<std::string>> seen{start};
        std::deque<Node> queue{build(start)};
        while (!queue.empty()) {
            const Node cur = queue.front();
            queue.pop_front();
            std::vector<Node> next;
            for (const auto& at : layer_paths(cur)) {
                for (const auto& k : kinds) {
                    next.push_back(add_layer_at(cur, at, *pset().find(k), ctx(), rng));
                }
            }
            for (const auto& at : single_input_layer_paths(cur)) {
                for (const auto& k : kinds) {
                    if (gp::node_at(cur, at).primitive->name != k) {
                        next.push_back(swap_layer_at(cur, at, *pset().find(k), ctx(), rng));
                    }
                }
            }
            for (const auto& at : removable_layer_paths(cur)) {
                next.push_back(remove_layer_at(cur, at));
            }
            for (auto& n : next) {
                auto chain = chain_of(n);
                if (chain.size() <= 3 && seen.insert(chain).second) {
                    queue.push_back(std::move(n));
                }
            }
        }
        CHECK(seen.size() == all.size());
    }
}

TEST_CASE("field mutations resample exactly one token")
{
    Rng rng(12);
    const Node base = parse(
        "NNLearner(data, DenseLayer(PretrainedStub(InputLayer(), vgg_stub), 10, sigmoid, 0.0), adam, 4)");
    constexpr int kTrials = 10000;
    for (auto [name, op, domain] : {std::tuple{"activation", mutate_activation, 7},
                                    std::tuple{"optimizer", mutate_optimizer, 8},
                                    std::tuple{"pretrained", mutate_pretrained, 3}}) {
        std::size_t same = 0;
        for (int i = 0; i < kTrials; ++i) {
            const auto out = op(base, ctx(), rng);
            REQUIRE(out.has_value());
            const auto d = token_diff(base, *out);
            REQUIRE(d.size() <= 1);
            same += d.empty() ? 1 : 0;
        }
        CHECK_MESSAGE(std::abs(double(same) / kTrials - 1.0 / domain) < 0.02, name);
    }
    CHECK_FALSE(mutate_activation(parse(learner("InputLayer()")), ctx(), rng).has_value());
    CHECK_FALSE(mutate_pretrained(parse(learner(dense("InputLayer()", 4))), ctx(), rng).has_value());
}

TEST_CASE("classic mutations behave per definition")
{
    Rng rng(21);
    for (int i = 0; i < 300; ++i) {
        const Node t = random_learner(rng);
        if (auto s = mutate_shrink(t, ctx(), rng)) {
            CHECK(gp::node_count(*s) < gp::node_count(t));
        }
        if (auto e = mutate_ephemeral(t, ctx(), rng)) {
            const auto d = token_diff(t, *e);
            REQUIRE(d.size() <= 1);
            if (d.size() == 1) {
                const auto tok = tokens(gp::to_expression(*e))[static_cast<std::size_t>(d[0])];
                CHECK_FALSE(pset().find(tok) != nullptr);
            }
        }
        if (auto ins = mutate_insert(t, ctx(), rng)) {
            CHECK(gp::node_count(*ins) > gp::node_count(t));
        }
        if (auto u = mutate_uniform(t, ctx(), rng)) {
            CHECK(u->primitive == t.primitive);
        }
    }
    CHECK_FALSE(mutate_shrink(parse(learner("InputLayer()")), ctx(), rng).has_value());
}

TEST_CASE("every operator keeps trees type-sound and within the depth limit")
{
    for (auto op : kOperators) {
        const auto r = testing::operator_closure_fuzz(pset(), op, 2000, 77 + static_cast<std::uint64_t>(op));
        CHECK_MESSAGE(r.type_violations == 0, to_string(op), ": ", r.first_failure);
        CHECK_MESSAGE(r.depth_violations == 0, to_string(op), ": ", r.first_failure);
        CHECK_MESSAGE(r.changed > 0, to_string(op));
    }
}

TEST_CASE("a tight depth limit turns growth into identity")
{
    Rng rng(0);
    const OperatorContext tight{pset(), 3};
    const Node t = parse(learner(dense("InputLayer()", 4)));
    CHECK_FALSE(mutate_add_layer(t, tight, rng).has_value());
    for (int i = 0; i < 50; ++i) {
        if (auto out = mutate_insert(t, tight, rng)) {
            CHECK(gp::depth(*out) <= 3);
        }
    }
    const auto cx = crossover_subtree_preserving(t, t, tight, rng);
    CHECK_FALSE(cx.has_value());
}

TEST_CASE("operator names round-trip")
{
    for (auto op : kOperators) {
        CHECK(operator_from_string(to_string(op)) == op);
    }
    CHECK(to_string(OperatorId::HeadlessChickenEphemeral) == "headless_chicken_ephemeral");
    CHECK_FALSE(operator_from_string("mutate_everything").has_value());
    CHECK(is_mating(OperatorId::CrossoverPreserving));
    CHECK_FALSE(is_mating(OperatorId::Shrink));
}
