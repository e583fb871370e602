#include "neurotree/runner/runner.hpp"

#include "neurotree/gp/expression.hpp"
#include "neurotree/io/datasets.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <thread>

namespace neurotree::runner {

std::optional<CacheEntry> ResultCache::find(const CacheKey& key) const
{
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ResultCache::insert(const CacheKey& key, const CacheEntry& entry)
{
    if (entry.status == EvalStatus::Timeout) {
        return;
    }
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign(key, entry);
}

std::size_t ResultCache::size() const
{
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::vector<std::pair<CacheKey, CacheEntry>> ResultCache::entries() const
{
    std::lock_guard lock(mutex_);
    return {entries_.begin(), entries_.end()};
}

void ResultCache::clear()
{
    std::lock_guard lock(mutex_);
    entries_.clear();
}

EvalRunner::EvalRunner(const gp::PrimitiveSet& pset, TrainingSettings settings,
                       std::shared_ptr<const nn::StubRegistry> stubs)
    : pset_(pset), settings_(settings), stubs_(std::move(stubs))
{
    if (!stubs_) {
        stubs_ = std::make_shared<const nn::StubRegistry>();
    }
}

void EvalRunner::register_dataset(const std::string& id, DataPair data)
{
    datasets_[id] = std::make_shared<const DataPair>(std::move(data));
}

std::shared_ptr<const DataPair> EvalRunner::dataset(const std::string& id)
{
    if (const auto it = datasets_.find(id); it != datasets_.end()) {
        return it->second;
    }
    auto data = std::make_shared<const DataPair>(io::load_dataset(id));
    datasets_[id] = data;
    return data;
}

EvalResult EvalRunner::run_one(const EvalRequest& request, const DataPair& data, double timeout_seconds) const
{
    const auto start = std::chrono::steady_clock::now();
    EvalResult result;
    result.id = request.id;

    primitives::LearnerOptions options;
    options.seed = request.train_seed;
    options.patience = settings_.patience;
    options.max_epochs = settings_.max_epochs;
    options.max_macs = settings_.max_macs;
    options.max_params = settings_.max_params;
    options.stubs = stubs_.get();
    if (timeout_seconds > 0) {
        options.deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                       std::chrono::duration<double>(timeout_seconds));
    }

    try {
        const gp::Node root = gp::parse_expression(request.expression, pset_, gp::SemType::PredictionVector);
        const auto outcome = primitives::nnlearner(root, data, options);
        result.objectives = outcome.objectives;
        result.status = outcome.status;
        result.epochs_run = outcome.report.epochs_run;
        result.best_epoch = outcome.report.best_epoch;
        result.message = outcome.message;
    } catch (const std::exception& e) {
        result.objectives = ObjectiveVector::sentinel(settings_.max_params);
        result.status = EvalStatus::CompileError;
        result.message = e.what();
    }
    result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<EvalResult> EvalRunner::evaluate_batch(const std::vector<EvalRequest>& requests, std::size_t workers,
                                                   double timeout_seconds)
{
    if (workers == 0) {
        throw std::invalid_argument("workers must be >= 1");
    }
    std::vector<EvalResult> results(requests.size());
    std::vector<std::shared_ptr<const DataPair>> data(requests.size());
    // Index of the request that trains each key; duplicates copy from it.
    std::map<CacheKey, std::size_t> owner;
    std::vector<std::size_t> jobs;
    std::vector<std::optional<std::size_t>> copy_from(requests.size());

    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        const CacheKey key{r.expression, r.dataset_id, r.train_seed};
        if (const auto hit = cache_.find(key)) {
            results[i].id = r.id;
            results[i].objectives = hit->objectives;
            results[i].status = hit->status;
            results[i].cache_hit = true;
            continue;
        }
        if (const auto it = owner.find(key); it != owner.end()) {
            copy_from[i] = it->second;
            continue;
        }
        owner.emplace(key, i);
        data[i] = dataset(r.dataset_id);
        jobs.push_back(i);
    }

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const std::size_t i = jobs[j];
            results[i] = run_one(requests[i], *data[i], timeout_seconds);
            const auto& r = requests[i];
            cache_.insert({r.expression, r.dataset_id, r.train_seed}, {results[i].objectives, results[i].status});
        }
    };
    const std::size_t n_threads = std::min(workers, jobs.size());
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back(work);
        }
    }

    for (std::size_t i = 0; i < requests.size(); ++i) {
        if (copy_from[i]) {
            const auto& src = results[*copy_from[i]];
            results[i].id = requests[i].id;
            results[i].objectives = src.objectives;
            results[i].status = src.status;
            results[i].cache_hit = true;
        }
        if (results[i].status != EvalStatus::Ok && !results[i].cache_hit) {
            spdlog::debug("individual {} {}: {}", results[i].id, primitives::to_string(results[i].status),
                          results[i].message);
        }
    }
    requests_served_ += requests.size();
    return results;
}

bool EvalRunner::recompute_matches(const CacheKey& key)
{
    const auto cached = cache_.find(key);
    if (!cached) {
        return false;
    }
    const EvalRequest request{0, key.expression, key.dataset_id, key.train_seed};
    const auto fresh = run_one(request, *dataset(key.dataset_id), 0.0);
    return fresh.status == cached->status && fresh.objectives == cached->objectives;
}

evolution::Evaluator make_evaluator(EvalRunner& runner, std::string dataset_id, std::uint64_t train_seed,
                                    std::size_t workers, double timeout_seconds)
{
    return [&runner, dataset_id = std::move(dataset_id), train_seed, workers,
            timeout_seconds](const std::vector<gp::Individual>& inds) {
        std::vector<EvalRequest> requests;
        requests.reserve(inds.size());
        for (const auto& ind : inds) {
            requests.push_back({ind.id, gp::to_expression(ind.root), dataset_id, train_seed});
        }
        const auto results = runner.evaluate_batch(requests, workers, timeout_seconds);
        evolution::BatchOutcome out;
        for (const auto& r : results) {
            out.objectives.push_back(r.objectives);
            out.cache_hits += r.cache_hit ? 1 : 0;
        }
        return out;
    };
}

} // namespace neurotree::runner
