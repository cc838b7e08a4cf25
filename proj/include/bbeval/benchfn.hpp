#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bbeval {

using Point = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool operator==(const Interval &) const = default;
};

using Box = std::vector<Interval>;

bool contains(const Box &box, std::span<const double> x);

enum class Property { oscillatory, discrete, mixed_integer, boring, nonsmooth, unimodal, multimodal };

std::string_view to_string(Property p);
std::vector<Property> all_properties();

struct BiasTransform {
    std::vector<double> shift;
    std::uint64_t seed = 0;

    bool operator==(const BiasTransform &) const = default;
};

using Formula = std::function<double(std::span<const double>)>;

/// A closed-form objective, oriented for maximization.
///
/// `formula` is always the unshifted objective on the original box. Shifted
/// variants produced by apply_bias_shift carry their offset in `transform`
/// and keep the same box, id, and optimum value.
struct BenchmarkFunction {
    std::string id;
    std::size_t dim = 0;
    Box domain;
    std::vector<std::size_t> integer_dims;
    std::set<Property> properties;
    std::optional<double> known_optimum_value;
    std::optional<Point> known_optimum_location;
    bool predictable_optimum = false;
    // Documented upper bound on the number of distinct values (discrete-tagged only).
    std::optional<std::size_t> discrete_image_bound;
    std::shared_ptr<const Formula> formula;
    std::optional<BiasTransform> transform;

    bool has(Property p) const { return properties.count(p) != 0; }
    bool is_integer_dim(std::size_t i) const;
};

const std::vector<BenchmarkFunction> &catalog();

// Throws UnknownFunction.
const BenchmarkFunction &find_function(std::string_view id);

// Checks box membership and integrality, then evaluates. An explicit transform
// is only accepted for functions that do not already carry one.
double evaluate(const BenchmarkFunction &fn, std::span<const double> x,
                const BiasTransform *transform = nullptr);

std::pair<BenchmarkFunction, BiasTransform> apply_bias_shift(const BenchmarkFunction &fn,
                                                             std::uint64_t seed);

bool is_domain_midpoint(const Box &box, std::span<const double> x);
bool has_all_integer_coords(std::span<const double> x);

nlohmann::json to_json(const BenchmarkFunction &fn);
nlohmann::json catalog_json(std::span<const BenchmarkFunction> fns);

} // namespace bbeval
