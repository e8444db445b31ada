#include "quantcredit/spreads.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "quantcredit/errors.hpp"

namespace quantcredit {

double spread(double p, double s, double t) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("survival probability must lie in [0, 1]");
    if (!(t > s)) throw DomainError("spread requires t > s");
    if (p == 0.0) return std::numeric_limits<double>::infinity();
    if (p == 1.0) return 0.0;
    return -std::log(p) / (t - s);
}

std::string format_spread(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_spread(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    return std::stod(text);
}

EulerSchedule::EulerSchedule(std::vector<std::pair<double, std::size_t>> tiers)
    : tiers_(std::move(tiers)) {
    if (tiers_.empty()) throw DomainError("Euler schedule needs at least one tier");
    for (std::size_t i = 0; i < tiers_.size(); ++i) {
        if (tiers_[i].second == 0) throw DomainError("Euler schedule step counts must be positive");
        if (i > 0 && !(tiers_[i].first > tiers_[i - 1].first))
            throw DomainError("Euler schedule bounds must be strictly increasing");
    }
}

EulerSchedule EulerSchedule::constant(std::size_t steps) {
    return EulerSchedule({{std::numeric_limits<double>::infinity(), steps}});
}

std::size_t EulerSchedule::steps_for(double maturity) const {
    for (const auto& [bound, steps] : tiers_)
        if (maturity <= bound + 1e-9) return steps;
    throw DomainError("no Euler schedule tier covers maturity " + format_spread(maturity));
}

std::string EulerSchedule::describe() const {
    std::string out;
    for (const auto& [bound, steps] : tiers_) {
        if (!out.empty()) out += ",";
        out += format_spread(bound) + ":" + std::to_string(steps);
    }
    return out;
}

std::vector<double> antitone_projection(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw DimensionMismatch("values and weights differ in length");
    // Pool adjacent violators on blocks of (weighted mean, weight, length).
    struct Block {
        double mean, weight;
        std::size_t length;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
            const Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            const double w = a.weight + b.weight;
            a.mean = (a.mean * a.weight + b.mean * b.weight) / w;
            a.weight = w;
            a.length += b.length;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : blocks) out.insert(out.end(), b.length, b.mean);
    return out;
}

SpreadCurve spread_curve(const FilterDistribution& filter, const FirmValueModel& fv,
                         const MarketScenario& scn, const EulerSchedule& schedule,
                         std::size_t trials, std::uint64_t seed, double weight_floor,
                         unsigned workers) {
    scn.validate();
    std::vector<MaturityPlan> plans;
    plans.reserve(scn.maturities.size());
    for (double t : scn.maturities) plans.push_back({t, schedule.steps_for(t)});

    MonteCarloSettings mc{trials, seed, workers, weight_floor};
    const auto mix =
        survival_mixture(filter.points, filter.weights, fv, scn.obs_horizon, scn.barrier, plans, mc);

    std::vector<double> value(plans.size()), weight(plans.size());
    for (std::size_t m = 0; m < plans.size(); ++m) {
        const double se = mix.estimates[m].std_error;
        value[m] = mix.estimates[m].value;
        weight[m] = 1.0 / (se * se + 1e-30);
    }
    const auto monotone = antitone_projection(value, weight);

    SpreadCurve curve;
    curve.s = scn.obs_horizon;
    curve.entries.reserve(plans.size());
    for (std::size_t m = 0; m < plans.size(); ++m) {
        const auto& e = mix.estimates[m];
        curve.entries.push_back({plans[m].maturity, monotone[m], e.std_error,
                                 spread(monotone[m], scn.obs_horizon, plans[m].maturity), plans[m].steps});
    }
    return curve;
}

void write_spread_csv(std::ostream& out, const SpreadCurve& curve,
                      const std::vector<std::string>& comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", curve.s);
    out << "# s=" << buf << '\n';
    out << "maturity,survival,stderr,spread\n";
    for (const auto& e : curve.entries) {
        char row[128];
        std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,", e.maturity, e.survival, e.std_error);
        out << row << format_spread(e.spread) << '\n';
    }
}

SpreadCurve read_spread_csv(std::istream& in) {
    SpreadCurve curve;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# s=", 0) == 0) {
            curve.s = std::stod(line.substr(4));
            continue;
        }
        if (line[0] == '#') continue;
        if (!header) {
            if (line != "maturity,survival,stderr,spread") throw std::runtime_error("spread csv: bad header");
            header = true;
            continue;
        }
        std::istringstream ss(line);
        std::string cell[4];
        for (auto& c : cell)
            if (!std::getline(ss, c, ',')) throw std::runtime_error("spread csv: malformed row");
        curve.entries.push_back(
            {std::stod(cell[0]), std::stod(cell[1]), std::stod(cell[2]), parse_spread(cell[3]), 0});
    }
    if (!header) throw std::runtime_error("spread csv: missing header");
    return curve;
}

}  // namespace quantcredit
