#include "bbeval/benchfn.hpp"

#include "bbeval/errors.hpp"
#include "bbeval/seed.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace bbeval {

bool contains(const Box &box, std::span<const double> x) {
    if (x.size() != box.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= box[i].lo && x[i] <= box[i].hi)) return false;
    }
    return true;
}

std::string_view to_string(Property p) {
    switch (p) {
    case Property::oscillatory: return "oscillatory";
    case Property::discrete: return "discrete";
    case Property::mixed_integer: return "mixed_integer";
    case Property::boring: return "boring";
    case Property::nonsmooth: return "nonsmooth";
    case Property::unimodal: return "unimodal";
    case Property::multimodal: return "multimodal";
    }
    return "unknown";
}

std::vector<Property> all_properties() {
    return {Property::oscillatory, Property::discrete, Property::mixed_integer, Property::boring,
            Property::nonsmooth,   Property::unimodal, Property::multimodal};
}

bool BenchmarkFunction::is_integer_dim(std::size_t i) const {
    return std::binary_search(integer_dims.begin(), integer_dims.end(), i);
}

bool is_domain_midpoint(const Box &box, std::span<const double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - box[i].mid()) > 1e-9 * box[i].width()) return false;
    }
    return true;
}

bool has_all_integer_coords(std::span<const double> x) {
    return std::all_of(x.begin(), x.end(),
                       [](double v) { return std::abs(v - std::round(v)) <= 1e-9; });
}

namespace {

constexpr double pi = std::numbers::pi;

struct Entry {
    std::string id;
    Box domain;
    std::vector<std::size_t> integer_dims;
    std::set<Property> properties;
    std::optional<Point> optimum;
    std::optional<std::size_t> discrete_bound;
    Formula formula;
};

Box cube(std::size_t d, double lo, double hi) { return Box(d, Interval{lo, hi}); }

double sq(double v) { return v * v; }

// Root of 4x^3 - 32x + 5 near -2.9035, the per-coordinate Styblinski-Tang minimizer.
double styblinski_tang_root() {
    double x = -2.9;
    for (int i = 0; i < 100; ++i) {
        double f = 4 * x * x * x - 32 * x + 5;
        double df = 12 * x * x - 32;
        double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-16) break;
    }
    return x;
}

std::vector<Entry> entries() {
    std::vector<Entry> out;

    auto neg_sphere = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return -s;
    };
    out.push_back({"neg_sphere_2d", cube(2, -5, 5), {}, {Property::unimodal}, Point(2, 0.0), {}, neg_sphere});
    out.push_back({"neg_sphere_5d", cube(5, -5, 5), {}, {Property::unimodal}, Point(5, 0.0), {}, neg_sphere});

    out.push_back({"neg_rosenbrock_2d", cube(2, -2, 2), {}, {Property::unimodal}, Point{1.0, 1.0}, {},
                   [](std::span<const double> x) {
                       return -(100.0 * sq(x[1] - x[0] * x[0]) + sq(1.0 - x[0]));
                   }});

    out.push_back({"neg_rastrigin_2d", cube(2, -5.12, 5.12), {},
                   {Property::oscillatory, Property::multimodal}, Point(2, 0.0), {},
                   [](std::span<const double> x) {
                       double s = 10.0 * static_cast<double>(x.size());
                       for (double v : x) s += v * v - 10.0 * std::cos(2 * pi * v);
                       return -s;
                   }});

    out.push_back({"neg_ackley_2d", cube(2, -5, 5), {}, {Property::multimodal, Property::nonsmooth},
                   Point(2, 0.0), {}, [](std::span<const double> x) {
                       double n = static_cast<double>(x.size());
                       double ss = 0.0, cs = 0.0;
                       for (double v : x) {
                           ss += v * v;
                           cs += std::cos(2 * pi * v);
                       }
                       double f = -20.0 * std::exp(-0.2 * std::sqrt(ss / n)) - std::exp(cs / n) +
                                  std::numbers::e + 20.0;
                       // The closed form cancels to a few ulps of zero at the origin.
                       return -std::max(f, 0.0);
                   }});

    out.push_back({"neg_griewank_2d", cube(2, -10, 10), {},
                   {Property::oscillatory, Property::multimodal}, Point(2, 0.0), {},
                   [](std::span<const double> x) {
                       double s = 0.0, p = 1.0;
                       for (std::size_t i = 0; i < x.size(); ++i) {
                           s += x[i] * x[i] / 4000.0;
                           p *= std::cos(x[i] / std::sqrt(static_cast<double>(i + 1)));
                       }
                       return -(1.0 + s - p);
                   }});

    out.push_back({"cosine_bowl_2d", cube(2, 0, 1), {}, {Property::oscillatory, Property::multimodal},
                   Point{0.37, 0.61}, {}, [](std::span<const double> x) {
                       double dx = x[0] - 0.37, dy = x[1] - 0.61;
                       return std::cos(8 * pi * dx) + std::cos(8 * pi * dy) - 4.0 * (dx * dx + dy * dy);
                   }});

    double st = styblinski_tang_root();
    out.push_back({"neg_styblinski_tang_2d", cube(2, -5, 5), {}, {Property::multimodal}, Point{st, st}, {},
                   [](std::span<const double> x) {
                       double s = 0.0;
                       for (double v : x) s += v * v * v * v - 16.0 * v * v + 5.0 * v;
                       return -0.5 * s;
                   }});

    out.push_back({"neg_himmelblau_2d", cube(2, -5, 5), {}, {Property::multimodal}, Point{3.0, 2.0}, {},
                   [](std::span<const double> x) {
                       return -(sq(x[0] * x[0] + x[1] - 11.0) + sq(x[0] + x[1] * x[1] - 7.0));
                   }});

    out.push_back({"neg_abs_sum_3d", cube(3, -3, 3), {}, {Property::unimodal, Property::nonsmooth},
                   Point(3, 0.0), {}, [](std::span<const double> x) {
                       double s = 0.0;
                       for (double v : x) s += std::abs(v);
                       return -s;
                   }});

    // Values are -(a^2 + b^2) with a, b in {0..5}: at most 36 distinct values.
    out.push_back({"step_sphere_2d", cube(2, -5, 5), {},
                   {Property::discrete, Property::nonsmooth, Property::unimodal}, Point(2, 0.0), 36,
                   [](std::span<const double> x) {
                       double s = 0.0;
                       for (double v : x) s += sq(std::floor(std::abs(v) + 0.5));
                       return -s;
                   }});

    // Chebyshev-distance staircase: values in {0.0, 0.1, ..., 1.0}.
    out.push_back({"plateau_ramp_3d", cube(3, 0, 1), {},
                   {Property::discrete, Property::nonsmooth, Property::unimodal}, Point{0.31, 0.58, 0.72}, 11,
                   [](std::span<const double> x) {
                       const double c[3] = {0.31, 0.58, 0.72};
                       double m = 0.0;
                       for (std::size_t i = 0; i < 3; ++i) m = std::max(m, std::abs(x[i] - c[i]));
                       return std::floor(10.0 * (1.0 - m)) / 10.0;
                   }});

    out.push_back({"mixed_int_quadratic_3d", Box{{-4, 4}, {-4, 4}, {0, 6}}, {2},
                   {Property::mixed_integer, Property::unimodal}, Point{1.3, -0.7, 4.0}, {},
                   [](std::span<const double> x) {
                       return -(sq(x[0] - 1.3) + sq(x[1] + 0.7) + sq(x[2] - 4.0));
                   }});

    out.push_back({"mixed_int_rastrigin_3d", Box{{-5.12, 5.12}, {-5, 5}, {0, 10}}, {1, 2},
                   {Property::mixed_integer, Property::oscillatory, Property::multimodal, Property::nonsmooth},
                   Point{0.0, 2.0, 3.0}, {}, [](std::span<const double> x) {
                       double r = x[0] * x[0] - 10.0 * std::cos(2 * pi * x[0]) + 10.0;
                       return -(r + std::abs(x[1] - 2.0) + 0.5 * sq(x[2] - 3.0));
                   }});

    // Flat zero except a paraboloid cap of radius 0.1 (about 3.1% of the box).
    out.push_back({"boring_plateau_2d", cube(2, 0, 1), {},
                   {Property::boring, Property::nonsmooth, Property::unimodal}, Point{0.73, 0.21}, {},
                   [](std::span<const double> x) {
                       double r2 = sq(x[0] - 0.73) + sq(x[1] - 0.21);
                       return std::max(0.0, 1.0 - r2 / 0.01);
                   }});

    // Flat zero except a cone of radius 0.35 (about 2.2% of the box).
    out.push_back({"boring_needle_3d", cube(3, -1, 1), {},
                   {Property::boring, Property::nonsmooth, Property::unimodal}, Point{0.42, -0.55, 0.13}, {},
                   [](std::span<const double> x) {
                       double r = std::sqrt(sq(x[0] - 0.42) + sq(x[1] + 0.55) + sq(x[2] - 0.13));
                       return std::max(0.0, 1.0 - r / 0.35);
                   }});

    out.push_back({"bump_mixture_2d", cube(2, 0, 1), {}, {Property::multimodal}, std::nullopt, {},
                   [](std::span<const double> x) {
                       const double cx[3] = {0.2, 0.65, 0.8};
                       const double cy[3] = {0.3, 0.75, 0.2};
                       const double h[3] = {0.8, 1.0, 0.6};
                       const double w[3] = {0.08, 0.05, 0.1};
                       double s = 0.0;
                       for (int k = 0; k < 3; ++k) {
                           s += h[k] * std::exp(-(sq(x[0] - cx[k]) + sq(x[1] - cy[k])) / (2 * w[k] * w[k]));
                       }
                       return s;
                   }});

    return out;
}

std::vector<BenchmarkFunction> build_catalog() {
    std::vector<BenchmarkFunction> fns;
    for (auto &e : entries()) {
        BenchmarkFunction fn;
        fn.id = e.id;
        fn.dim = e.domain.size();
        fn.domain = e.domain;
        fn.integer_dims = e.integer_dims;
        fn.properties = e.properties;
        if (!fn.integer_dims.empty()) fn.properties.insert(Property::mixed_integer);
        fn.discrete_image_bound = e.discrete_bound;
        fn.formula = std::make_shared<const Formula>(std::move(e.formula));
        if (e.optimum) {
            fn.known_optimum_location = e.optimum;
            fn.known_optimum_value = (*fn.formula)(*e.optimum) + 0.0;
            fn.predictable_optimum =
                is_domain_midpoint(fn.domain, *e.optimum) || has_all_integer_coords(*e.optimum);
        }
        fns.push_back(std::move(fn));
    }
    return fns;
}

std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

} // namespace

const std::vector<BenchmarkFunction> &catalog() {
    static const std::vector<BenchmarkFunction> fns = build_catalog();
    return fns;
}

const BenchmarkFunction &find_function(std::string_view id) {
    for (const auto &fn : catalog()) {
        if (fn.id == id) return fn;
    }
    throw Error(ErrorKind::UnknownFunction, "no catalog function '" + std::string(id) + "'");
}

double evaluate(const BenchmarkFunction &fn, std::span<const double> x, const BiasTransform *transform) {
    if (x.size() != fn.dim) {
        throw Error(ErrorKind::DomainViolation, fn.id + ": expected " + std::to_string(fn.dim) +
                                                    " coordinates, got " + std::to_string(x.size()));
    }
    if (!contains(fn.domain, x)) {
        throw Error(ErrorKind::DomainViolation, fn.id + ": point " + format_point(x) + " outside domain");
    }
    for (std::size_t i : fn.integer_dims) {
        if (x[i] != std::round(x[i])) {
            throw Error(ErrorKind::IntegralityViolation,
                        fn.id + ": coordinate " + std::to_string(i) + " must be integral");
        }
    }
    if (transform && fn.transform) {
        throw Error(ErrorKind::NotApplicable, fn.id + ": function already carries a bias transform");
    }
    const BiasTransform *t = transform ? transform : (fn.transform ? &*fn.transform : nullptr);
    if (!t) return (*fn.formula)(x);

    Point y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = std::clamp(y[i] - t->shift[i], fn.domain[i].lo, fn.domain[i].hi);
    }
    return (*fn.formula)(y);
}

std::pair<BenchmarkFunction, BiasTransform> apply_bias_shift(const BenchmarkFunction &fn, std::uint64_t seed) {
    if (!fn.predictable_optimum || !fn.known_optimum_location || fn.transform) {
        throw Error(ErrorKind::NotApplicable, fn.id + ": optimum location is not predictable");
    }
    const Point &opt = *fn.known_optimum_location;

    // Degenerate draws (optimum lands on the midpoint, on an integer lattice
    // point, or on the boundary) are rejected and redrawn from the next stream.
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        std::mt19937_64 rng(SeedHasher(seed).add(attempt).digest());
        BiasTransform t{Point(fn.dim), seed};
        Point moved(fn.dim);
        bool inside = true;
        for (std::size_t i = 0; i < fn.dim; ++i) {
            double s = (2.0 * unit_uniform(rng()) - 1.0) * 0.1 * fn.domain[i].width();
            if (fn.is_integer_dim(i)) s = std::round(s);
            t.shift[i] = s;
            moved[i] = opt[i] + s;
            inside = inside && moved[i] > fn.domain[i].lo && moved[i] < fn.domain[i].hi;
        }
        if (!inside || is_domain_midpoint(fn.domain, moved) || has_all_integer_coords(moved)) continue;

        BenchmarkFunction shifted = fn;
        shifted.known_optimum_location = moved;
        shifted.predictable_optimum = false;
        shifted.transform = t;
        return {std::move(shifted), std::move(t)};
    }
    throw Error(ErrorKind::NotApplicable, fn.id + ": no admissible shift found");
}

nlohmann::json to_json(const BenchmarkFunction &fn) {
    nlohmann::json domain = nlohmann::json::array();
    for (const auto &iv : fn.domain) domain.push_back({iv.lo, iv.hi});
    nlohmann::json props = nlohmann::json::array();
    for (Property p : fn.properties) props.push_back(std::string(to_string(p)));
    nlohmann::json j;
    j["id"] = fn.id;
    j["dim"] = fn.dim;
    j["domain"] = domain;
    j["integer_dims"] = fn.integer_dims;
    j["properties"] = props;
    j["known_optimum_value"] = fn.known_optimum_value ? nlohmann::json(*fn.known_optimum_value) : nlohmann::json();
    j["predictable_optimum"] = fn.predictable_optimum;
    return j;
}

nlohmann::json catalog_json(std::span<const BenchmarkFunction> fns) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &fn : fns) arr.push_back(to_json(fn));
    return arr;
}

} // namespace bbeval
