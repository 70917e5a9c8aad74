#include "gdr/start_table.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gdr {

namespace {

const char* stat_name(StatKind k) {
    switch (k) {
        case StatKind::second_moment: return "second_moment";
    }
    return "unknown";
}

StatKind stat_from_name(const std::string& s) {
    if (s == "second_moment") return StatKind::second_moment;
    throw std::runtime_error("StartTable: unknown stat kind '" + s + "'");
}

double second_moment_about(const std::vector<Image>& imgs, double center) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const Image& img : imgs) {
        for (double v : img.data) {
            double d = v - center;
            acc += d * d;
        }
        n += img.data.size();
    }
    return acc / static_cast<double>(n);
}

}  // namespace

void StartTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("StartTable::save: cannot open " + path);
    out.precision(17);
    out << "# dsst tol=" << tol << " stat=" << stat_name(stat) << " T=" << T << "\n";
    for (const Entry& e : entries) out << e.std << "\t" << e.t_start << "\n";
}

StartTable StartTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("StartTable::load: cannot open " + path);
    StartTable t;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("StartTable::load: empty file " + path);
    {
        std::istringstream ss(line);
        std::string hash, name, kv;
        ss >> hash >> name;
        if (hash != "#" || name != "dsst")
            throw std::runtime_error("StartTable::load: bad header in " + path);
        while (ss >> kv) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "tol") t.tol = std::stod(val);
            else if (key == "stat") t.stat = stat_from_name(val);
            else if (key == "T") t.T = std::stoi(val);
        }
    }
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Entry e;
        if (!(ss >> e.std >> e.t_start))
            throw std::runtime_error("StartTable::load: malformed line: " + line);
        t.entries.push_back(e);
    }
    if (t.entries.empty()) throw std::runtime_error("StartTable::load: no entries in " + path);
    return t;
}

StartTable build_start_table_from_moments(double m_x, const std::vector<double>& m_y,
                                          const StdGrid& grid, double tol,
                                          const DiffusionSchedule& sched) {
    if (!(tol > 0.0)) throw std::invalid_argument("build_start_table: tol must be > 0");
    std::vector<double> stds = grid.values();
    if (stds.size() != m_y.size())
        throw std::invalid_argument("build_start_table: grid/moment size mismatch");
    if (!(m_x > 0.0))
        throw std::runtime_error("build_start_table: degenerate corpus, clean statistic non-positive");

    StartTable table;
    table.tol = tol;
    table.stat = StatKind::second_moment;
    table.T = sched.T;

    int prev_t = 0;
    for (std::size_t i = 0; i < stds.size(); ++i) {
        if (!(m_y[i] > 0.0))
            throw std::runtime_error("build_start_table: degenerate corpus, blurred statistic non-positive");
        int t_std = sched.T - 1;
        for (int t = 0; t < sched.T; ++t) {
            double ab = sched.alpha_bar[t];
            double gap = std::log(ab * m_x + (1.0 - ab)) - std::log(ab * m_y[i] + (1.0 - ab));
            if (gap <= tol) {
                t_std = t;
                break;
            }
        }
        if (t_std < prev_t)
            throw std::runtime_error("build_start_table: t_start not monotone in std at std=" +
                                     std::to_string(stds[i]));
        prev_t = t_std;
        table.entries.push_back({stds[i], t_std});
    }
    return table;
}

StartTable build_start_table(const std::vector<Image>& corpus, const StdGrid& grid, double tol,
                             const DiffusionSchedule& sched) {
    if (corpus.empty()) throw std::invalid_argument("build_start_table: empty corpus");
    double m = 0.0;
    std::size_t n = 0;
    for (const Image& img : corpus) {
        for (double v : img.data) m += v;
        n += img.data.size();
    }
    m /= static_cast<double>(n);

    double m_x = second_moment_about(corpus, m);
    std::vector<double> stds = grid.values();
    std::vector<double> m_y(stds.size());
    for (std::size_t i = 0; i < stds.size(); ++i) {
        GaussianKernel k = make_kernel(stds[i]);
        std::vector<Image> blurred;
        blurred.reserve(corpus.size());
        for (const Image& img : corpus) blurred.push_back(convolve(img, k));
        m_y[i] = second_moment_about(blurred, m);
    }
    return build_start_table_from_moments(m_x, m_y, grid, tol, sched);
}

LookupResult lookup(const StartTable& table, double std_hat) {
    if (table.entries.empty()) throw std::invalid_argument("lookup: empty table");
    const auto& es = table.entries;
    if (std_hat <= es.front().std)
        return {es.front().t_start, std_hat < es.front().std - 1e-12};
    if (std_hat >= es.back().std)
        return {es.back().t_start, std_hat > es.back().std + 1e-12};
    // nearest entry, ties toward larger std
    std::size_t best = 0;
    double best_d = 1e300;
    for (std::size_t i = 0; i < es.size(); ++i) {
        double d = std::abs(es[i].std - std_hat);
        if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && es[i].std > es[best].std)) {
            best_d = d;
            best = i;
        }
    }
    return {es[best].t_start, false};
}

}  // namespace gdr
