#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include "limitlab/error.hpp"

namespace limitlab {

/// Every numeric default in one place. The CLI exposes each field by name
/// through `--set name=value`; see `Tolerances::apply`.
struct Tolerances {
    // dynamics
    double r_div = 1e12;      ///< divergence guard on max |coordinate|
    double eps_excl = 1e-9;   ///< exclusion radius around poles

    // limit sets
    std::size_t burn = 500;
    std::size_t tail = 500;
    std::size_t max_windows = 8;  ///< extra windows tried before giving up on settling
    double tol_settle = 1e-7;
    double tol_fp = 1e-6;
    double tol_cluster = 1e-3;
    std::size_t max_period = 64;
    double r_bound = 1e6;
    double escape_radius = 1e8;
    std::size_t horizon = 2000;   ///< boundedness probe length
    std::size_t basin_tail = 32;  ///< tail used to label a basin cell
    std::size_t witness_depth = 24;

    // linear analysis
    double tol_eig = 1e-8;
    double tol_rank = 1e-8;
    double tol_zero = 1e-8;  ///< relative size below which a split component counts as zero
    std::size_t growth_probe = 200;

    // immersions
    double delta_sep = 1e-3;
    double delta_img = 1e-6;

    // lifts
    std::size_t train_grid = 512;
    std::size_t train_random = 512;
    std::size_t heldout = 1000;
    std::size_t probe_samples = 500;
    std::size_t max_catalog = 64;

    struct Entry {
        const char* name;
        const char* help;
    };

    static const std::vector<Entry>& entries() {
        static const std::vector<Entry> table = {
            {"r_div", "divergence guard on the max coordinate magnitude"},
            {"eps_excl", "exclusion radius around excluded points"},
            {"burn", "burn-in steps before the first tail window"},
            {"tail", "tail window length"},
            {"max_windows", "windows tried before an estimate is reported unsettled"},
            {"tol_settle", "Hausdorff tolerance between consecutive windows"},
            {"tol_fp", "diameter below which a limit set is a fixed point"},
            {"tol_cluster", "Hausdorff tolerance when merging limit sets"},
            {"max_period", "largest period searched for periodic orbits"},
            {"r_bound", "radius for the bounded verdict"},
            {"escape_radius", "radius for the unbounded verdict"},
            {"horizon", "steps probed by classify_boundedness"},
            {"basin_tail", "tail points used to label a basin cell"},
            {"witness_depth", "length of the shrinking sequences in witness search"},
            {"tol_eig", "band around |lambda| = 1"},
            {"tol_rank", "relative rank tolerance"},
            {"tol_zero", "relative size of a negligible split component"},
            {"growth_probe", "steps used for the empirical growth constant"},
            {"delta_sep", "minimum input separation for an injectivity collision"},
            {"delta_img", "maximum image separation for an injectivity collision"},
            {"train_grid", "grid training samples per lift fit"},
            {"train_random", "random training samples per lift fit"},
            {"heldout", "held-out grid size for lift evaluation"},
            {"probe_samples", "samples for the injectivity probe in sweeps"},
            {"max_catalog", "countable-catalog guard"},
        };
        return table;
    }

private:
    template <class Self>
    static auto fields(Self& t) {
        using C = std::conditional_t<std::is_const_v<Self>, const std::size_t*, std::size_t*>;
        using R = std::conditional_t<std::is_const_v<Self>, const double*, double*>;
        std::map<std::string, C> counts = {
            {"burn", &t.burn}, {"tail", &t.tail}, {"max_windows", &t.max_windows},
            {"max_period", &t.max_period}, {"horizon", &t.horizon}, {"basin_tail", &t.basin_tail},
            {"witness_depth", &t.witness_depth}, {"growth_probe", &t.growth_probe},
            {"train_grid", &t.train_grid}, {"train_random", &t.train_random}, {"heldout", &t.heldout},
            {"probe_samples", &t.probe_samples}, {"max_catalog", &t.max_catalog}};
        std::map<std::string, R> reals = {
            {"r_div", &t.r_div}, {"eps_excl", &t.eps_excl}, {"tol_settle", &t.tol_settle},
            {"tol_fp", &t.tol_fp}, {"tol_cluster", &t.tol_cluster}, {"r_bound", &t.r_bound},
            {"escape_radius", &t.escape_radius}, {"tol_eig", &t.tol_eig}, {"tol_rank", &t.tol_rank},
            {"tol_zero", &t.tol_zero}, {"delta_sep", &t.delta_sep}, {"delta_img", &t.delta_img}};
        return std::pair{counts, reals};
    }

public:
    /// Set a field by name. Throws ValidationError for unknown keys or
    /// values that do not fit the field.
    void apply(const std::string& name, double value) {
        auto [counts, reals] = fields(*this);
        if (auto it = counts.find(name); it != counts.end()) {
            if (!(value >= 0) || value != static_cast<double>(static_cast<std::uint64_t>(value)))
                throw ValidationError("bad_override", name + " must be a non-negative integer");
            *it->second = static_cast<std::size_t>(value);
            return;
        }
        if (auto it = reals.find(name); it != reals.end()) {
            if (!(value > 0)) throw ValidationError("bad_override", name + " must be positive");
            *it->second = value;
            return;
        }
        throw ValidationError("unknown_override", "unknown tolerance '" + name + "'");
    }

    /// Current value of a field by name.
    double value(const std::string& name) const {
        auto [counts, reals] = fields(*this);
        if (auto it = counts.find(name); it != counts.end()) return static_cast<double>(*it->second);
        if (auto it = reals.find(name); it != reals.end()) return *it->second;
        throw ValidationError("unknown_override", "unknown tolerance '" + name + "'");
    }
};

}  // namespace limitlab
