#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "quantcredit/filtering.hpp"
#include "quantcredit/model.hpp"
#include "quantcredit/survival.hpp"

namespace quantcredit {

/// Zero-coupon credit spread -log(p)/(t-s) for zero recovery and unit face
/// value. p = 0 gives +infinity.
double spread(double p, double s, double t);

/// "inf" for infinite spreads, %.17g otherwise.
std::string format_spread(double x);
double parse_spread(const std::string& text);

/// Maps a maturity to its Euler step count. Tiers are (upper maturity bound,
/// steps), tried in order; a maturity within 1e-9 of a bound belongs to it.
class EulerSchedule {
public:
    EulerSchedule() = default;
    explicit EulerSchedule(std::vector<std::pair<double, std::size_t>> tiers);
    /// Constant step count for every maturity.
    static EulerSchedule constant(std::size_t steps);

    std::size_t steps_for(double maturity) const;
    const std::vector<std::pair<double, std::size_t>>& tiers() const noexcept { return tiers_; }
    std::string describe() const;

private:
    std::vector<std::pair<double, std::size_t>> tiers_;
};

struct SpreadPoint {
    double maturity = 0.0;
    double survival = 0.0;
    double std_error = 0.0;
    double spread = 0.0;
    std::size_t euler_steps = 0;
};

struct SpreadCurve {
    double s = 0.0;
    std::vector<SpreadPoint> entries;
};

/// Weighted least-squares projection onto nonincreasing sequences (pool
/// adjacent violators). Already-monotone input is returned unchanged.
std::vector<double> antitone_projection(std::span<const double> values, std::span<const double> weights);

/// Spread curve over scn.maturities from one filter. All maturities share each
/// trial's Brownian path, so survival is computed under common random numbers
/// across the whole curve; the quantization grids are not touched. Maturities
/// use different Euler grids, so the raw estimates can still tick upward where
/// the hazard is small next to the grid noise; survival is therefore projected
/// onto nonincreasing curves with weights 1/stderr^2.
SpreadCurve spread_curve(const FilterDistribution& filter, const FirmValueModel& fv,
                         const MarketScenario& scn, const EulerSchedule& schedule,
                         std::size_t trials, std::uint64_t seed, double weight_floor = 1e-12,
                         unsigned workers = 0);

/// CSV "maturity,survival,stderr,spread", preceded by "# " comment lines.
void write_spread_csv(std::ostream& out, const SpreadCurve& curve,
                      const std::vector<std::string>& comments = {});
SpreadCurve read_spread_csv(std::istream& in);

}  // namespace quantcredit
