#include "bbeval/optimizers.hpp"

#include "bbeval/errors.hpp"
#include "bbeval/external_adapter.hpp"
#include "bbeval/seed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbeval {

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::random_search: return "random_search";
    case OptimizerKind::pso: return "pso";
    case OptimizerKind::external: return "external";
    }
    return "unknown";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
    if (name == "random_search") return OptimizerKind::random_search;
    if (name == "pso") return OptimizerKind::pso;
    if (name == "external") return OptimizerKind::external;
    throw Error(ErrorKind::FatalConfigError, "unknown optimizer kind '" + std::string(name) + "'");
}

OptimizerSpec optimizer_spec_from_json(const nlohmann::json &j) {
    try {
        OptimizerSpec spec;
        spec.method_id = j.at("method_id").get<std::string>();
        spec.kind = optimizer_kind_from_string(j.at("kind").get<std::string>());
        spec.params = j.value("params", nlohmann::json::object());
        spec.version_label = j.value("version_label", std::string());
        validate(spec);
        return spec;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::FatalConfigError, std::string("optimizer spec: ") + e.what());
    }
}

nlohmann::json to_json(const OptimizerSpec &spec) {
    return {{"method_id", spec.method_id},
            {"kind", std::string(to_string(spec.kind))},
            {"params", spec.params},
            {"version_label", spec.version_label}};
}

PsoParams PsoParams::from(const OptimizerSpec &spec) {
    PsoParams p;
    const auto &j = spec.params;
    try {
        p.swarm_size = j.value("swarm_size", p.swarm_size);
        p.inertia = j.value("inertia", p.inertia);
        p.cognitive = j.value("cognitive", p.cognitive);
        p.social = j.value("social", p.social);
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::FatalConfigError, spec.method_id + ": " + e.what());
    }
    if (p.swarm_size < 2) throw Error(ErrorKind::FatalConfigError, spec.method_id + ": swarm_size must be >= 2");
    if (!(p.inertia > 0 && p.cognitive > 0 && p.social > 0)) {
        throw Error(ErrorKind::FatalConfigError, spec.method_id + ": PSO coefficients must be positive");
    }
    return p;
}

ExternalParams ExternalParams::from(const OptimizerSpec &spec) {
    ExternalParams p;
    const auto &j = spec.params;
    try {
        if (!j.contains("command")) {
            throw Error(ErrorKind::FatalConfigError, spec.method_id + ": external optimizer needs a command");
        }
        const auto &cmd = j.at("command");
        if (cmd.is_string()) {
            p.command.push_back(cmd.get<std::string>());
        } else {
            p.command = cmd.get<std::vector<std::string>>();
        }
        if (j.contains("args")) {
            for (const auto &a : j.at("args")) p.command.push_back(a.get<std::string>());
        }
        if (j.contains("timeout_s")) {
            double s = j.at("timeout_s").get<double>();
            if (!(s > 0)) throw Error(ErrorKind::FatalConfigError, spec.method_id + ": timeout_s must be positive");
            p.timeout = std::chrono::milliseconds(static_cast<long long>(std::ceil(s * 1000.0)));
        }
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::FatalConfigError, spec.method_id + ": " + e.what());
    }
    if (p.command.empty() || p.command.front().empty()) {
        throw Error(ErrorKind::FatalConfigError, spec.method_id + ": empty command");
    }
    return p;
}

void validate(const OptimizerSpec &spec) {
    if (spec.method_id.empty()) throw Error(ErrorKind::FatalConfigError, "method_id must not be empty");
    if (!spec.params.is_object()) throw Error(ErrorKind::FatalConfigError, spec.method_id + ": params must be an object");
    switch (spec.kind) {
    case OptimizerKind::pso: PsoParams::from(spec); break;
    case OptimizerKind::external: ExternalParams::from(spec); break;
    case OptimizerKind::random_search: break;
    }
}

namespace {

Point uniform_point(const Box &box, std::mt19937_64 &rng) {
    Point x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        x[i] = box[i].lo + unit_uniform(rng()) * box[i].width();
    }
    return x;
}

class ExternalOptimizer final : public Optimizer {
public:
    ExternalOptimizer(const OptimizerSpec &spec, const Box &domain, std::size_t budget, std::uint64_t seed)
        : adapter_(make_options(spec), domain, budget, seed) {}

    std::optional<Point> ask() override { return adapter_.next_suggestion(); }
    void tell(double value) override { adapter_.send_result(value); }

private:
    static AdapterOptions make_options(const OptimizerSpec &spec) {
        auto p = ExternalParams::from(spec);
        AdapterOptions o;
        o.command = std::move(p.command);
        o.timeout = p.timeout;
        return o;
    }

    ExternalAdapter adapter_;
};

} // namespace

RandomSearch::RandomSearch(Box domain, std::uint64_t seed) : domain_(std::move(domain)), rng_(seed) {}

std::optional<Point> RandomSearch::ask() { return uniform_point(domain_, rng_); }

ParticleSwarm::ParticleSwarm(Box domain, PsoParams params, std::uint64_t seed)
    : domain_(std::move(domain)), params_(params), rng_(seed),
      gbest_value_(-std::numeric_limits<double>::infinity()) {
    const std::size_t n = params_.swarm_size;
    const std::size_t d = domain_.size();
    position_.reserve(n);
    velocity_.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        position_.push_back(uniform_point(domain_, rng_));
        Point v(d);
        for (std::size_t i = 0; i < d; ++i) {
            double w = domain_[i].width();
            v[i] = -w + 2.0 * w * unit_uniform(rng_());
        }
        velocity_.push_back(std::move(v));
    }
    pbest_ = position_;
    pbest_value_.assign(n, -std::numeric_limits<double>::infinity());
    gbest_ = position_.front();
}

std::optional<Point> ParticleSwarm::ask() { return position_[cursor_]; }

void ParticleSwarm::tell(double value) {
    if (value > pbest_value_[cursor_]) {
        pbest_value_[cursor_] = value;
        pbest_[cursor_] = position_[cursor_];
    }
    if (value > gbest_value_) {
        gbest_value_ = value;
        gbest_ = position_[cursor_];
    }
    if (++cursor_ == params_.swarm_size) {
        advance();
        cursor_ = 0;
        ++generation_;
    }
}

void ParticleSwarm::advance() {
    for (std::size_t k = 0; k < params_.swarm_size; ++k) {
        Point &x = position_[k];
        Point &v = velocity_[k];
        for (std::size_t i = 0; i < x.size(); ++i) {
            double r1 = unit_uniform(rng_());
            double r2 = unit_uniform(rng_());
            v[i] = params_.inertia * v[i] + params_.cognitive * r1 * (pbest_[k][i] - x[i]) +
                   params_.social * r2 * (gbest_[i] - x[i]);
            x[i] += v[i];
            if (x[i] < domain_[i].lo) {
                x[i] = domain_[i].lo;
                v[i] = 0.0;
            } else if (x[i] > domain_[i].hi) {
                x[i] = domain_[i].hi;
                v[i] = 0.0;
            }
        }
    }
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec &spec, const Box &domain, std::size_t budget,
                                          std::uint64_t seed) {
    switch (spec.kind) {
    case OptimizerKind::random_search: return std::make_unique<RandomSearch>(domain, seed);
    case OptimizerKind::pso: return std::make_unique<ParticleSwarm>(domain, PsoParams::from(spec), seed);
    case OptimizerKind::external: return std::make_unique<ExternalOptimizer>(spec, domain, budget, seed);
    }
    throw Error(ErrorKind::FatalConfigError, "unhandled optimizer kind");
}

Session::Session(const OptimizerSpec &spec, Box domain, std::size_t budget, std::uint64_t rng_seed)
    : domain_(std::move(domain)), budget_(budget), rng_seed_(rng_seed) {
    if (budget_ == 0) throw Error(ErrorKind::FatalConfigError, "budget must be positive");
    optimizer_ = make_optimizer(spec, domain_, budget_, rng_seed_);
    history_.reserve(budget_);
}

std::optional<Point> Session::suggest() {
    if (history_.size() >= budget_) {
        throw Error(ErrorKind::BudgetExhausted, "budget of " + std::to_string(budget_) + " evaluations used");
    }
    if (stopped_) return std::nullopt;
    if (pending_) return pending_;
    auto p = optimizer_->ask();
    if (!p) {
        stopped_ = true;
        return std::nullopt;
    }
    if (!contains(domain_, *p)) throw Error(ErrorKind::DomainViolation, "optimizer suggested an out-of-domain point");
    pending_ = std::move(p);
    return pending_;
}

void Session::observe(const Point &point, double value) {
    if (!pending_ || point != *pending_) {
        throw Error(ErrorKind::OutOfOrderObservation, "observation does not match the pending suggestion");
    }
    history_.push_back({std::move(*pending_), value});
    pending_.reset();
    optimizer_->tell(value);
}

} // namespace bbeval
