#pragma once

#include "neurotree/data.hpp"
#include "neurotree/evolution/evolution.hpp"
#include "neurotree/nn/pretrained.hpp"
#include "neurotree/primitives/learner.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

namespace neurotree::runner {

using primitives::EvalStatus;

struct EvalRequest {
    std::uint64_t id = 0;
    /// Canonical rendering; part of the cache key.
    std::string expression;
    std::string dataset_id;
    std::uint64_t train_seed = 0;
};

struct EvalResult {
    std::uint64_t id = 0;
    ObjectiveVector objectives;
    double wall_time = 0.0;
    EvalStatus status = EvalStatus::Ok;
    bool cache_hit = false;
    int epochs_run = 0;
    int best_epoch = -1;
    std::string message;
};

struct CacheKey {
    std::string expression;
    std::string dataset_id;
    std::uint64_t train_seed = 0;

    auto operator<=>(const CacheKey&) const = default;
};

struct CacheEntry {
    ObjectiveVector objectives;
    EvalStatus status = EvalStatus::Ok;

    bool operator==(const CacheEntry&) const = default;
};

/// Thread-safe memo of finished evaluations. Timeouts are never stored: they
/// depend on machine load, not on the key.
class ResultCache {
public:
    std::optional<CacheEntry> find(const CacheKey& key) const;
    void insert(const CacheKey& key, const CacheEntry& entry);
    std::size_t size() const;
    /// Snapshot in key order.
    std::vector<std::pair<CacheKey, CacheEntry>> entries() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::map<CacheKey, CacheEntry> entries_;
};

/// Training knobs shared by every evaluation of a run.
struct TrainingSettings {
    int patience = 5;
    int max_epochs = 30;
    std::size_t max_macs = nn::kDefaultMaxMacs;
    std::int64_t max_params = kDefaultMaxParams;
};

/// Evaluates individuals on a worker pool. Datasets are resolved once per id
/// (io::load_dataset unless registered) and shared read-only by workers.
class EvalRunner {
public:
    EvalRunner(const gp::PrimitiveSet& pset, TrainingSettings settings,
               std::shared_ptr<const nn::StubRegistry> stubs = nullptr);

    /// Makes `id` resolve to `data` instead of going through the loaders.
    void register_dataset(const std::string& id, DataPair data);

    /// Results in request order. In-batch duplicates and keys already cached
    /// are not re-trained. `timeout_seconds` <= 0 disables the deadline.
    /// Never throws for a bad individual; its status records the failure. An
    /// unresolvable dataset id throws io::DatasetError or
    /// std::invalid_argument before any work starts.
    std::vector<EvalResult> evaluate_batch(const std::vector<EvalRequest>& requests, std::size_t workers,
                                           double timeout_seconds);

    /// Re-trains `key` from scratch and compares with the cached entry;
    /// false when they differ or the key is not cached.
    bool recompute_matches(const CacheKey& key);

    ResultCache& cache() { return cache_; }
    const ResultCache& cache() const { return cache_; }
    /// Requests seen so far, cache hits included.
    std::size_t requests_served() const { return requests_served_; }

private:
    std::shared_ptr<const DataPair> dataset(const std::string& id);
    EvalResult run_one(const EvalRequest& request, const DataPair& data, double timeout_seconds) const;

    const gp::PrimitiveSet& pset_;
    TrainingSettings settings_;
    std::shared_ptr<const nn::StubRegistry> stubs_;
    std::map<std::string, std::shared_ptr<const DataPair>> datasets_;
    ResultCache cache_;
    std::size_t requests_served_ = 0;
};

/// Adapts a runner to the evolution loop: every individual becomes a request
/// on `dataset_id` with the run-wide `train_seed`.
evolution::Evaluator make_evaluator(EvalRunner& runner, std::string dataset_id, std::uint64_t train_seed,
                                    std::size_t workers, double timeout_seconds);

} // namespace neurotree::runner
