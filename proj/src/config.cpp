#include "quantcredit/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "quantcredit/errors.hpp"
#include "quantcredit/random.hpp"

namespace quantcredit {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool to_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

bool to_size(const std::string& s, std::size_t& out) {
    if (s.empty() || s[0] == '-') return false;
    double d = 0.0;
    if (!to_double(s, d)) return false;
    // Accept 1e5-style integers.
    if (!(d >= 0.0) || d != std::floor(d) || d > 9e15) return false;
    out = static_cast<std::size_t>(d);
    return true;
}

double round12(double x) { return std::round(x * 1e12) / 1e12; }

std::string fmt17(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "firm.model",           "firm.mu",
        "firm.sigma",           "firm.gamma",
        "firm.beta",            "observation.psi",
        "observation.nu",       "observation.delta",
        "scenario.v0",          "scenario.s0",
        "scenario.barrier",     "scenario.s",
        "scenario.maturities",  "numerics.n",
        "numerics.grid_size",   "numerics.sizes",
        "numerics.lloyd_iters", "numerics.quantizer_paths",
        "numerics.transition_paths", "numerics.euler_schedule",
        "numerics.mc_trials",   "numerics.weight_floor",
        "numerics.workers",     "run.seed",
        "run.output_dir",
    };
    return keys;
}

struct Entry {
    std::string value;
    std::size_t line;
};

class Reader {
public:
    Reader(std::map<std::string, Entry> entries, std::vector<std::string>& errors)
        : entries_(std::move(entries)), errors_(errors) {}

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string text(const std::string& key, bool required, std::string fallback = {}) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (required) errors_.push_back(key + ": required");
            return fallback;
        }
        return it->second.value;
    }

    double number(const std::string& key, bool required, double fallback = 0.0) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            if (required) errors_.push_back(key + ": required");
            return fallback;
        }
        double v = 0.0;
        if (!to_double(it->second.value, v)) {
            errors_.push_back(where(it->second) + key + ": not a number: '" + it->second.value + "'");
            return fallback;
        }
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        std::size_t v = 0;
        if (!to_size(it->second.value, v)) {
            errors_.push_back(where(it->second) + key + ": not a nonnegative integer: '" +
                              it->second.value + "'");
            return fallback;
        }
        return v;
    }

    TimeFunction function(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            errors_.push_back(key + ": required");
            return TimeFunction::constant(0.0);
        }
        const auto& raw = it->second.value;
        if (raw.find(':') == std::string::npos) {
            double v = 0.0;
            if (!to_double(raw, v)) {
                errors_.push_back(where(it->second) + key + ": not a number: '" + raw + "'");
                return TimeFunction::constant(0.0);
            }
            return TimeFunction::constant(v);
        }
        std::vector<double> knots, values;
        for (const auto& item : split(raw, ',')) {
            const auto parts = split(item, ':');
            double t = 0.0, v = 0.0;
            if (parts.size() != 2 || !to_double(parts[0], t) || !to_double(parts[1], v)) {
                errors_.push_back(where(it->second) + key + ": malformed table entry '" + item + "'");
                return TimeFunction::constant(0.0);
            }
            knots.push_back(t);
            values.push_back(v);
        }
        try {
            return TimeFunction::piecewise(std::move(knots), std::move(values));
        } catch (const DomainError& e) {
            errors_.push_back(where(it->second) + key + ": " + e.what());
            return TimeFunction::constant(0.0);
        }
    }

    std::size_t line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    static std::string where(const Entry& e) { return "line " + std::to_string(e.line) + ": "; }

private:
    std::map<std::string, Entry> entries_;
    std::vector<std::string>& errors_;
};

}  // namespace

FirmValueModel FirmConfig::build() const {
    if (model == "gbm") return FirmValueModel::gbm(mu, sigma);
    if (model == "cev") return FirmValueModel::cev(mu, gamma, beta);
    throw DomainError("unknown firm model '" + model + "'");
}

TimeGrid ScenarioConfig::time_grid() const { return TimeGrid::uniform(scenario.obs_horizon, numerics.n); }

std::string ScenarioConfig::canonical() const {
    std::ostringstream out;
    out << "firm=" << firm_model().describe() << '\n';
    out << "observation=" << observation.describe() << '\n';
    out << "scenario.v0=" << fmt17(scenario.v0) << '\n';
    out << "scenario.s0=" << fmt17(scenario.s0) << '\n';
    out << "scenario.barrier=" << fmt17(scenario.barrier) << '\n';
    out << "scenario.s=" << fmt17(scenario.obs_horizon) << '\n';
    out << "scenario.maturities=";
    for (std::size_t i = 0; i < scenario.maturities.size(); ++i)
        out << (i ? "," : "") << fmt17(scenario.maturities[i]);
    out << '\n';
    out << "numerics.n=" << numerics.n << '\n';
    out << "numerics.sizes=";
    for (std::size_t i = 0; i < numerics.sizes.size(); ++i) out << (i ? "," : "") << numerics.sizes[i];
    out << '\n';
    out << "numerics.lloyd_iters=" << numerics.lloyd_iters << '\n';
    out << "numerics.quantizer_paths=" << numerics.quantizer_paths << '\n';
    out << "numerics.transition_paths=" << numerics.transition_paths << '\n';
    out << "numerics.euler_schedule=" << numerics.euler_schedule.describe() << '\n';
    out << "numerics.mc_trials=" << numerics.mc_trials << '\n';
    out << "numerics.weight_floor=" << fmt17(numerics.weight_floor) << '\n';
    out << "run.seed=" << seed << '\n';
    return out.str();
}

static std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ScenarioConfig::hash() const { return hex16(fnv1a(canonical())); }

std::string ScenarioConfig::quantization_hash() const {
    std::ostringstream out;
    out << firm_model().describe() << ';' << fmt17(scenario.v0) << ';' << fmt17(scenario.obs_horizon)
        << ';' << numerics.n << ';';
    for (auto s : numerics.sizes) out << s << ',';
    out << ';' << numerics.lloyd_iters << ';' << numerics.quantizer_paths << ';'
        << numerics.transition_paths << ';' << seed;
    return hex16(fnv1a(out.str()));
}

std::vector<double> parse_maturities(std::string_view text) {
    const std::string raw = trim(text);
    std::vector<double> out;
    if (raw.empty()) return out;
    const auto parts = split(raw, ':');
    if (parts.size() == 3) {
        double start = 0.0, step = 0.0, end = 0.0;
        if (!to_double(parts[0], start) || !to_double(parts[1], step) || !to_double(parts[2], end))
            throw DomainError("malformed maturity range '" + raw + "'");
        if (!(step > 0.0)) throw DomainError("maturity range step must be positive");
        for (std::size_t i = 0;; ++i) {
            const double t = round12(start + static_cast<double>(i) * step);
            if (t > end + 1e-9) break;
            out.push_back(t);
            if (i > 10000000) throw DomainError("maturity range too long");
        }
        return out;
    }
    if (parts.size() != 1) throw DomainError("malformed maturity list '" + raw + "'");
    for (const auto& item : split(raw, ',')) {
        double t = 0.0;
        if (!to_double(item, t)) throw DomainError("malformed maturity '" + item + "'");
        out.push_back(t);
    }
    return out;
}

ScenarioConfig parse_config(std::string_view text) {
    std::vector<std::string> errors;
    std::map<std::string, Entry> entries;

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'section.key = value'");
            continue;
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (!known_keys().count(key)) {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
            continue;
        }
        if (entries.count(key)) {
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            continue;
        }
        entries[key] = Entry{value, line_no};
    }

    Reader r(std::move(entries), errors);
    ScenarioConfig cfg;

    cfg.firm.model = r.text("firm.model", true);
    cfg.firm.mu = r.number("firm.mu", true);
    if (cfg.firm.model == "gbm") {
        cfg.firm.sigma = r.number("firm.sigma", true);
        if (!(cfg.firm.sigma > 0.0)) errors.push_back("firm.sigma: must be > 0");
    } else if (cfg.firm.model == "cev") {
        cfg.firm.gamma = r.number("firm.gamma", true);
        cfg.firm.beta = r.number("firm.beta", true);
        if (!(cfg.firm.gamma > 0.0)) errors.push_back("firm.gamma: must be > 0");
    } else if (r.has("firm.model")) {
        errors.push_back("firm.model: must be 'gbm' or 'cev', got '" + cfg.firm.model + "'");
    }

    cfg.observation.psi = r.number("observation.psi", true);
    cfg.observation.nu = r.function("observation.nu");
    cfg.observation.delta = r.function("observation.delta");

    cfg.scenario.v0 = r.number("scenario.v0", true);
    cfg.scenario.s0 = r.number("scenario.s0", true);
    cfg.scenario.barrier = r.number("scenario.barrier", true);
    cfg.scenario.obs_horizon = r.number("scenario.s", true);
    if (r.has("scenario.maturities")) {
        try {
            cfg.scenario.maturities = parse_maturities(r.text("scenario.maturities", true));
        } catch (const DomainError& e) {
            errors.push_back("line " + std::to_string(r.line_of("scenario.maturities")) +
                             ": scenario.maturities: " + e.what());
        }
    }
    for (auto& v : cfg.scenario.violations()) errors.push_back(std::move(v));

    auto& num = cfg.numerics;
    num.n = r.count("numerics.n", num.n);
    if (num.n == 0) errors.push_back("numerics.n: must be >= 1");
    if (r.has("numerics.sizes")) {
        for (const auto& item : split(r.text("numerics.sizes", true), ',')) {
            std::size_t s = 0;
            if (!to_size(item, s)) {
                errors.push_back("line " + std::to_string(r.line_of("numerics.sizes")) +
                                 ": numerics.sizes: malformed entry '" + item + "'");
                break;
            }
            num.sizes.push_back(s);
        }
        if (r.has("numerics.grid_size")) errors.push_back("numerics.grid_size: conflicts with numerics.sizes");
    } else {
        const std::size_t g = r.count("numerics.grid_size", 60);
        num.sizes.assign(num.n + 1, g);
        if (!num.sizes.empty()) num.sizes[0] = 1;
    }
    if (num.sizes.size() != num.n + 1)
        errors.push_back("numerics.sizes: must have n + 1 = " + std::to_string(num.n + 1) + " entries");
    else if (num.sizes[0] != 1)
        errors.push_back("numerics.sizes: first entry must be 1");
    if (std::any_of(num.sizes.begin(), num.sizes.end(), [](std::size_t s) { return s == 0; }))
        errors.push_back("numerics.sizes: entries must be positive");

    num.lloyd_iters = r.count("numerics.lloyd_iters", num.lloyd_iters);
    num.quantizer_paths = r.count("numerics.quantizer_paths", num.quantizer_paths);
    num.transition_paths = r.count("numerics.transition_paths", num.transition_paths);
    const std::size_t max_size = num.sizes.empty() ? 1 : *std::max_element(num.sizes.begin(), num.sizes.end());
    if (num.quantizer_paths < 100 * max_size)
        errors.push_back("numerics.quantizer_paths: must be >= 100 x max grid size (" +
                         std::to_string(100 * max_size) + ")");
    if (num.transition_paths == 0) errors.push_back("numerics.transition_paths: must be > 0");

    if (r.has("numerics.euler_schedule")) {
        std::vector<std::pair<double, std::size_t>> tiers;
        bool ok = true;
        for (const auto& item : split(r.text("numerics.euler_schedule", true), ',')) {
            const auto parts = split(item, ':');
            double bound = 0.0;
            std::size_t steps = 0;
            if (parts.size() != 2 || !to_double(parts[0], bound) || !to_size(parts[1], steps)) {
                errors.push_back("line " + std::to_string(r.line_of("numerics.euler_schedule")) +
                                 ": numerics.euler_schedule: malformed tier '" + item + "'");
                ok = false;
                break;
            }
            tiers.emplace_back(bound, steps);
        }
        if (ok) {
            try {
                num.euler_schedule = EulerSchedule(std::move(tiers));
            } catch (const DomainError& e) {
                errors.push_back(std::string("numerics.euler_schedule: ") + e.what());
            }
        }
    }
    for (double t : cfg.scenario.maturities) {
        try {
            if (num.euler_schedule.steps_for(t) < 2)
                errors.push_back("numerics.euler_schedule: needs at least 2 steps per maturity");
        } catch (const DomainError& e) {
            errors.push_back(std::string("numerics.euler_schedule: ") + e.what());
            break;
        }
    }

    num.mc_trials = r.count("numerics.mc_trials", num.mc_trials);
    if (num.mc_trials < 100) errors.push_back("numerics.mc_trials: must be >= 100");
    num.weight_floor = r.number("numerics.weight_floor", false, num.weight_floor);
    if (!(num.weight_floor >= 0.0 && num.weight_floor < 1.0))
        errors.push_back("numerics.weight_floor: must lie in [0, 1)");
    num.workers = static_cast<unsigned>(r.count("numerics.workers", 0));

    cfg.seed = r.count("run.seed", 1);
    cfg.output_dir = r.text("run.output_dir", false, cfg.output_dir);

    if (cfg.scenario.obs_horizon > 0.0) {
        try {
            cfg.observation.validate(cfg.scenario.obs_horizon);
        } catch (const ValidationError& e) {
            for (const auto& v : e.violations()) errors.push_back(v);
        }
    }

    if (!errors.empty()) throw ValidationError(std::move(errors));
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError({"cannot read config file '" + path.string() + "'"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace quantcredit
