#pragma once

#include "bbeval/benchfn.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace bbeval {

enum class OptimizerKind { random_search, pso, external };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct OptimizerSpec {
    std::string method_id;
    OptimizerKind kind = OptimizerKind::random_search;
    nlohmann::json params = nlohmann::json::object();
    std::string version_label;
};

OptimizerSpec optimizer_spec_from_json(const nlohmann::json &j);
nlohmann::json to_json(const OptimizerSpec &spec);

// Constriction-coefficient defaults.
struct PsoParams {
    std::size_t swarm_size = 20;
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;

    static PsoParams from(const OptimizerSpec &spec);
};

struct ExternalParams {
    std::vector<std::string> command;
    std::chrono::milliseconds timeout{60000};

    static ExternalParams from(const OptimizerSpec &spec);
};

// Throws FatalConfigError on invalid parameters for the spec's kind.
void validate(const OptimizerSpec &spec);

/// Incremental ask/tell interface. Every ask() is answered by exactly one
/// tell() before the next ask().
class Optimizer {
public:
    virtual ~Optimizer() = default;
    // nullopt means the optimizer stopped early.
    virtual std::optional<Point> ask() = 0;
    virtual void tell(double value) = 0;
};

class RandomSearch final : public Optimizer {
public:
    RandomSearch(Box domain, std::uint64_t seed);

    std::optional<Point> ask() override;
    void tell(double) override {}

private:
    Box domain_;
    std::mt19937_64 rng_;
};

/// Synchronous global-best PSO. Personal and global bests are updated on each
/// tell(); velocities and positions move once the whole generation has been
/// observed. Out-of-box coordinates are clamped and their velocity zeroed.
class ParticleSwarm final : public Optimizer {
public:
    ParticleSwarm(Box domain, PsoParams params, std::uint64_t seed);

    std::optional<Point> ask() override;
    void tell(double value) override;

    double global_best_value() const { return gbest_value_; }
    const Point &global_best_position() const { return gbest_; }
    std::size_t generation() const { return generation_; }

private:
    void advance();

    Box domain_;
    PsoParams params_;
    std::mt19937_64 rng_;
    std::vector<Point> position_;
    std::vector<Point> velocity_;
    std::vector<Point> pbest_;
    std::vector<double> pbest_value_;
    Point gbest_;
    double gbest_value_;
    std::size_t cursor_ = 0;
    std::size_t generation_ = 0;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec &spec, const Box &domain,
                                          std::size_t budget, std::uint64_t seed);

struct Observation {
    Point x;
    double value = 0.0;
};

/// Suggest/observe protocol around one optimizer for one run.
///
/// suggest() is idempotent until the pending point is observed: repeated
/// calls return the same point. The full suggestion sequence is a pure
/// function of (spec, seed, observed values) for the built-in kinds.
class Session {
public:
    Session(const OptimizerSpec &spec, Box domain, std::size_t budget, std::uint64_t rng_seed);

    // Throws BudgetExhausted; nullopt after an early stop.
    std::optional<Point> suggest();
    // Throws OutOfOrderObservation unless `point` is the pending suggestion.
    void observe(const Point &point, double value);

    std::size_t budget() const { return budget_; }
    std::uint64_t rng_seed() const { return rng_seed_; }
    const std::vector<Observation> &history() const { return history_; }
    bool stopped() const { return stopped_; }
    const Optimizer &optimizer() const { return *optimizer_; }

private:
    Box domain_;
    std::size_t budget_;
    std::uint64_t rng_seed_;
    std::unique_ptr<Optimizer> optimizer_;
    std::vector<Observation> history_;
    std::optional<Point> pending_;
    bool stopped_ = false;
};

} // namespace bbeval
