#include "quantcredit/grid_cache.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "quantcredit/errors.hpp"

namespace quantcredit {

namespace {

void put(std::ostream& out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
}

void put_list(std::ostream& out, const char* tag, const std::vector<double>& xs) {
    out << tag;
    for (double x : xs) {
        out << ' ';
        put(out, x);
    }
    out << '\n';
}

[[noreturn]] void bad(std::size_t line, const std::string& what) {
    throw std::runtime_error("grid cache line " + std::to_string(line) + ": " + what);
}

struct LineReader {
    std::istream& in;
    std::size_t line = 0;

    std::istringstream next(const std::string& expected_tag) {
        std::string text;
        if (!std::getline(in, text)) bad(line + 1, "unexpected end of file, expected '" + expected_tag + "'");
        ++line;
        std::istringstream ss(text);
        std::string tag;
        ss >> tag;
        if (tag != expected_tag) bad(line, "expected '" + expected_tag + "', found '" + tag + "'");
        return ss;
    }

    template <class T>
    T read(std::istringstream& ss, const char* what) {
        T v{};
        if (!(ss >> v)) bad(line, std::string("malformed ") + what);
        return v;
    }

    std::vector<double> read_doubles(std::istringstream& ss, std::size_t count, const char* what) {
        std::vector<double> out(count);
        for (auto& v : out) {
            std::string tok;
            if (!(ss >> tok)) bad(line, std::string("too few values in ") + what);
            v = std::stod(tok);
        }
        std::string extra;
        if (ss >> extra) bad(line, std::string("too many values in ") + what);
        return out;
    }
};

}  // namespace

void write_grid_cache(std::ostream& out, const GridCache& cache) {
    const auto& seq = cache.sequence;
    const std::size_t n = seq.steps();
    if (cache.transitions.size() != n) throw DimensionMismatch("need one transition matrix per step");
    out << "quantcredit-grid " << kGridCacheVersion << '\n';
    out << "model_hash " << cache.model_hash << '\n';
    out << "n " << n << '\n';
    out << "sizes";
    for (const auto& g : seq.grids) out << ' ' << g.size();
    out << '\n';
    for (std::size_t k = 0; k <= n; ++k) {
        const auto& g = seq.grids[k];
        out << "step " << k << " time ";
        put(out, seq.times[k]);
        out << " distortion ";
        put(out, g.distortion);
        out << " empty_cells " << g.empty_cells << " degenerate " << (g.degenerate ? 1 : 0) << '\n';
        put_list(out, "points", g.points);
        put_list(out, "weights", g.weights);
        if (k == 0) continue;
        const auto& m = cache.transitions[k - 1];
        out << "transition_samples " << m.samples << '\n';
        for (std::size_t i = 0; i < m.rows; ++i) {
            out << "row " << (i < m.visits.size() ? m.visits[i] : 0);
            for (double p : m.row(i)) {
                out << ' ';
                put(out, p);
            }
            out << '\n';
        }
    }
    out << "end\n";
}

GridCache read_grid_cache(std::istream& in) {
    LineReader r{in};
    GridCache cache;
    {
        auto ss = r.next("quantcredit-grid");
        const int version = r.read<int>(ss, "version");
        if (version != kGridCacheVersion) bad(r.line, "unsupported version " + std::to_string(version));
    }
    {
        auto ss = r.next("model_hash");
        cache.model_hash = r.read<std::string>(ss, "model hash");
    }
    std::size_t n = 0;
    {
        auto ss = r.next("n");
        n = r.read<std::size_t>(ss, "step count");
    }
    std::vector<std::size_t> sizes(n + 1);
    {
        auto ss = r.next("sizes");
        for (auto& s : sizes) s = r.read<std::size_t>(ss, "sizes");
    }
    auto& seq = cache.sequence;
    seq.times.resize(n + 1);
    seq.grids.resize(n + 1);
    cache.transitions.resize(n);
    for (std::size_t k = 0; k <= n; ++k) {
        auto& g = seq.grids[k];
        {
            auto ss = r.next("step");
            if (r.read<std::size_t>(ss, "step index") != k) bad(r.line, "steps out of order");
            std::string tag;
            ss >> tag;
            seq.times[k] = std::stod(r.read<std::string>(ss, "time"));
            ss >> tag;
            g.distortion = std::stod(r.read<std::string>(ss, "distortion"));
            ss >> tag;
            g.empty_cells = r.read<std::size_t>(ss, "empty_cells");
            ss >> tag;
            g.degenerate = r.read<int>(ss, "degenerate") != 0;
        }
        {
            auto ss = r.next("points");
            g.points = r.read_doubles(ss, sizes[k], "points");
        }
        {
            auto ss = r.next("weights");
            g.weights = r.read_doubles(ss, sizes[k], "weights");
        }
        if (k == 0) continue;
        auto& m = cache.transitions[k - 1];
        {
            auto ss = r.next("transition_samples");
            m.samples = r.read<std::uint64_t>(ss, "transition samples");
        }
        m.rows = sizes[k - 1];
        m.cols = sizes[k];
        m.entries.reserve(m.rows * m.cols);
        m.visits.assign(m.rows, 0);
        m.empty_rows.assign(m.rows, false);
        for (std::size_t i = 0; i < m.rows; ++i) {
            auto ss = r.next("row");
            m.visits[i] = r.read<std::uint64_t>(ss, "row visits");
            m.empty_rows[i] = m.visits[i] == 0;
            auto row = r.read_doubles(ss, m.cols, "transition row");
            m.entries.insert(m.entries.end(), row.begin(), row.end());
        }
    }
    r.next("end");
    return cache;
}

void save_grid_cache(const std::filesystem::path& path, const GridCache& cache) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_grid_cache(out, cache);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

GridCache load_grid_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_grid_cache(in);
}

}  // namespace quantcredit
