#include "neurotree/evolution/pareto.hpp"

#include "neurotree/gp/expression.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace neurotree::evolution {

bool dominates(const Point& a, const Point& b)
{
    if (a.size() != b.size()) {
        throw std::invalid_argument("objective vectors differ in length");
    }
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        strictly = strictly || a[i] < b[i];
    }
    return strictly;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(const std::vector<Point>& points)
{
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated[p].push_back(q);
            } else if (dominates(points[q], points[p])) {
                ++domination_count[p];
            }
        }
        if (domination_count[p] == 0) {
            current.push_back(p);
        }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto p : current) {
            for (auto q : dominated[p]) {
                if (--domination_count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(const std::vector<ObjectiveVector>& points)
{
    std::vector<Point> p;
    p.reserve(points.size());
    for (const auto& o : points) {
        const auto v = o.values();
        p.emplace_back(v.begin(), v.end());
    }
    return fast_nondominated_sort(p);
}

std::vector<double> crowding_distance(const std::vector<Point>& front)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = front.size();
    if (n <= 2) {
        return std::vector<double>(n, inf);
    }
    std::vector<double> dist(n, 0.0);
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < front[0].size(); ++m) {
        std::iota(order.begin(), order.end(), 0);
        // Full-vector tie-break so the result does not depend on input order
        // unless points are exact duplicates.
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (front[a][m] != front[b][m]) {
                return front[a][m] < front[b][m];
            }
            if (front[a] != front[b]) {
                return front[a] < front[b];
            }
            return a < b;
        });
        const double lo = front[order.front()][m];
        const double hi = front[order.back()][m];
        if (!(hi > lo)) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = order[i];
            if (front[idx][m] == lo || front[idx][m] == hi) {
                dist[idx] = inf;
            } else {
                dist[idx] += (front[order[i + 1]][m] - front[order[i - 1]][m]) / (hi - lo);
            }
        }
    }
    return dist;
}

std::vector<std::size_t> nsga2_select(const std::vector<gp::Individual>& pop, std::size_t k)
{
    if (k > pop.size()) {
        throw std::invalid_argument("cannot select " + std::to_string(k) + " of " + std::to_string(pop.size()));
    }
    std::vector<Point> points;
    points.reserve(pop.size());
    for (const auto& ind : pop) {
        if (!ind.objectives) {
            throw std::invalid_argument("individual " + std::to_string(ind.id) + " has not been evaluated");
        }
        const auto v = ind.objectives->values();
        points.emplace_back(v.begin(), v.end());
    }
    std::vector<std::size_t> out;
    out.reserve(k);
    for (const auto& front : fast_nondominated_sort(points)) {
        if (out.size() >= k) {
            break;
        }
        std::vector<Point> fp;
        for (auto i : front) {
            fp.push_back(points[i]);
        }
        const auto cd = crowding_distance(fp);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cd[a] != cd[b]) {
                return cd[a] > cd[b];
            }
            return pop[front[a]].id < pop[front[b]].id;
        });
        for (auto j : order) {
            if (out.size() == k) {
                break;
            }
            out.push_back(front[j]);
        }
    }
    return out;
}

double hypervolume(const std::vector<ObjectiveVector>& points, const ObjectiveVector& reference)
{
    const double rx = reference.error_rate;
    const double ry = static_cast<double>(reference.param_count);
    std::vector<std::pair<double, double>> inside;
    for (const auto& p : points) {
        const double x = p.error_rate;
        const double y = static_cast<double>(p.param_count);
        if (x < rx && y < ry) {
            inside.emplace_back(x, y);
        }
    }
    std::sort(inside.begin(), inside.end());
    double area = 0.0;
    double best_y = ry;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        best_y = std::min(best_y, inside[i].second);
        const double next_x = i + 1 < inside.size() ? inside[i + 1].first : rx;
        area += (next_x - inside[i].first) * (ry - best_y);
    }
    return area;
}

bool ParetoArchive::update(const gp::Individual& ind)
{
    if (!ind.objectives) {
        throw std::invalid_argument("archive accepts evaluated individuals only");
    }
    std::string expr = gp::to_expression(ind.root);
    if (expressions_.contains(expr)) {
        return false;
    }
    for (const auto& m : members_) {
        if (neurotree::dominates(*m.objectives, *ind.objectives)) {
            return false;
        }
    }
    std::erase_if(members_, [&](const gp::Individual& m) {
        if (neurotree::dominates(*ind.objectives, *m.objectives)) {
            expressions_.erase(gp::to_expression(m.root));
            return true;
        }
        return false;
    });
    expressions_.insert(std::move(expr));
    const auto key = [](const gp::Individual& m) {
        return std::tuple(m.objectives->error_rate, m.objectives->param_count, m.id);
    };
    members_.insert(std::upper_bound(members_.begin(), members_.end(), ind,
                                     [&](const gp::Individual& a, const gp::Individual& b) { return key(a) < key(b); }),
                    ind);
    return true;
}

double ParetoArchive::best_error() const
{
    return members_.empty() ? 1.0 : members_.front().objectives->error_rate;
}

double ParetoArchive::hypervolume(const ObjectiveVector& reference) const
{
    std::vector<ObjectiveVector> pts;
    pts.reserve(members_.size());
    for (const auto& m : members_) {
        pts.push_back(*m.objectives);
    }
    return evolution::hypervolume(pts, reference);
}

} // namespace neurotree::evolution
