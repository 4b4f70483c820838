#pragma once
// Network data model and the versioned CSV dataset format.
//
// A dataset is a directory with three files:
//   buses.csv      header "id,demand_kw", one row per bus
//   branches.csv   header "id,from,to,r_ohm,x_ohm,is_tie", is_tie in {0,1}
//   manifest.json  {"name": ..., "root_bus": ..., "format_version": 1}

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gridconf/errors.hpp"

namespace gridconf {

struct Bus {
    int id = 0;          // 1-based, contiguous
    double demand_kw = 0.0;

    friend bool operator==(const Bus&, const Bus&) = default;
};

struct Branch {
    int id = 0;          // 1-based, ties numbered last in the bundled feeders
    int from_bus = 0;
    int to_bus = 0;
    double resistance_ohm = 0.0;
    double reactance_ohm = 0.0;
    bool is_tie = false;

    double impedance() const { return std::hypot(resistance_ohm, reactance_ohm); }

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// Immutable graph of buses and branches. Construct through create() or
/// load_network(); both run the full validation pass.
struct Network {
    std::string name;
    std::vector<Bus> buses;       // sorted by id, ids are 1..N
    std::vector<Branch> branches; // sorted by id, ids are 1..E
    int root = 1;

    int bus_count() const { return static_cast<int>(buses.size()); }
    int branch_count() const { return static_cast<int>(branches.size()); }

    int tie_count() const {
        int t = 0;
        for (const auto& b : branches) t += b.is_tie ? 1 : 0;
        return t;
    }

    double total_demand_kw() const {
        double s = 0.0;
        for (const auto& b : buses) s += b.demand_kw;
        return s;
    }

    const Branch& branch(int id) const { return branches[static_cast<size_t>(id - 1)]; }

    friend bool operator==(const Network&, const Network&) = default;

    static Network create(std::string name, std::vector<Bus> buses,
                          std::vector<Branch> branches, int root);
};

/// The decision variable: the set of open branch ids, kept sorted.
struct Configuration {
    std::vector<int> open_edges;

    explicit Configuration(std::vector<int> ids = {}) : open_edges(std::move(ids)) {
        std::sort(open_edges.begin(), open_edges.end());
    }

    bool contains(int id) const {
        return std::binary_search(open_edges.begin(), open_edges.end(), id);
    }

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

namespace detail {

inline void validate(const Network& net) {
    const int n = net.bus_count();
    if (n < 2) throw ValidationError(net.name + ": need at least 2 buses");
    for (int i = 0; i < n; ++i) {
        if (net.buses[static_cast<size_t>(i)].id != i + 1)
            throw ValidationError(net.name + ": bus ids must be unique and contiguous 1..N");
        if (net.buses[static_cast<size_t>(i)].demand_kw < 0)
            throw ValidationError(net.name + ": negative demand at bus " +
                                  std::to_string(i + 1));
    }
    if (net.root < 1 || net.root > n)
        throw ValidationError(net.name + ": root bus " + std::to_string(net.root) +
                              " does not exist");
    const int e = net.branch_count();
    bool any_positive_z = false;
    int ties = 0;
    for (int i = 0; i < e; ++i) {
        const Branch& b = net.branches[static_cast<size_t>(i)];
        if (b.id != i + 1)
            throw ValidationError(net.name + ": branch ids must be unique and contiguous 1..E");
        if (b.from_bus == b.to_bus)
            throw ValidationError(net.name + ": branch " + std::to_string(b.id) +
                                  " is a self-loop");
        if (b.from_bus < 1 || b.from_bus > n || b.to_bus < 1 || b.to_bus > n)
            throw ValidationError(net.name + ": branch " + std::to_string(b.id) +
                                  " references a missing bus");
        if (!std::isfinite(b.impedance()) || b.resistance_ohm < 0 || b.reactance_ohm < 0)
            throw ValidationError(net.name + ": branch " + std::to_string(b.id) +
                                  " has an invalid impedance");
        if (b.impedance() > 0) any_positive_z = true;
        ties += b.is_tie ? 1 : 0;
    }
    if (!any_positive_z)
        throw ValidationError(net.name + ": all branch impedances are zero");
    if (ties < 1)
        throw ValidationError(net.name + ": at least one tie branch is required");
    if (e - ties != n - 1)
        throw ValidationError(net.name + ": expected N-1 non-tie branches, got " +
                              std::to_string(e - ties));

    // the graph with every branch closed must be connected
    std::vector<std::vector<int>> adj(static_cast<size_t>(n + 1));
    for (const auto& b : net.branches) {
        adj[static_cast<size_t>(b.from_bus)].push_back(b.to_bus);
        adj[static_cast<size_t>(b.to_bus)].push_back(b.from_bus);
    }
    std::vector<char> seen(static_cast<size_t>(n + 1), 0);
    std::vector<int> stack{net.root};
    seen[static_cast<size_t>(net.root)] = 1;
    int reached = 0;
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        ++reached;
        for (int nb : adj[static_cast<size_t>(k)])
            if (!seen[static_cast<size_t>(nb)]) {
                seen[static_cast<size_t>(nb)] = 1;
                stack.push_back(nb);
            }
    }
    if (reached != n)
        throw ValidationError(net.name + ": full graph is disconnected (" +
                              std::to_string(reached) + "/" + std::to_string(n) +
                              " buses reachable)");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline long parse_int(const std::string& s, const std::string& file, int line) {
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(s, &pos);
    } catch (const std::exception&) {
        throw ParseError(file + ":" + std::to_string(line) + ": expected integer, got '" + s + "'");
    }
    if (pos != s.size())
        throw ParseError(file + ":" + std::to_string(line) + ": expected integer, got '" + s + "'");
    return v;
}

inline double parse_real(const std::string& s, const std::string& file, int line) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError(file + ":" + std::to_string(line) + ": expected number, got '" + s + "'");
    }
    if (pos != s.size())
        throw ParseError(file + ":" + std::to_string(line) + ": expected number, got '" + s + "'");
    return v;
}

// Minimal manifest reader. The manifest is machine-written flat JSON; a line
// oriented scan keeps this header free of a JSON dependency.
inline void parse_manifest(const std::filesystem::path& path, std::string& name,
                           int& root, int& version) {
    std::ifstream in(path);
    if (!in) throw NotFoundError(path.string() + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    auto find_string = [&](const std::string& key) -> std::string {
        auto kp = text.find("\"" + key + "\"");
        if (kp == std::string::npos)
            throw ParseError(path.string() + ": missing key '" + key + "'");
        auto q1 = text.find('"', text.find(':', kp));
        auto q2 = text.find('"', q1 + 1);
        if (q1 == std::string::npos || q2 == std::string::npos)
            throw ParseError(path.string() + ": bad value for '" + key + "'");
        return text.substr(q1 + 1, q2 - q1 - 1);
    };
    auto find_int = [&](const std::string& key) -> int {
        auto kp = text.find("\"" + key + "\"");
        if (kp == std::string::npos)
            throw ParseError(path.string() + ": missing key '" + key + "'");
        auto cp = text.find(':', kp);
        if (cp == std::string::npos)
            throw ParseError(path.string() + ": bad value for '" + key + "'");
        return static_cast<int>(std::stol(text.substr(cp + 1)));
    };

    name = find_string("name");
    root = find_int("root_bus");
    version = find_int("format_version");
}

}  // namespace detail

inline Network Network::create(std::string name, std::vector<Bus> buses,
                               std::vector<Branch> branches, int root) {
    std::sort(buses.begin(), buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
    std::sort(branches.begin(), branches.end(),
              [](const Branch& a, const Branch& b) { return a.id < b.id; });
    Network net{std::move(name), std::move(buses), std::move(branches), root};
    detail::validate(net);
    return net;
}

/// Loads and validates a dataset directory. Deterministic: identical bytes
/// produce an identical Network.
inline Network load_network(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::string name;
    int root = 0, version = 0;
    detail::parse_manifest(dir / "manifest.json", name, root, version);
    if (version != 1)
        throw ParseError((dir / "manifest.json").string() + ": unsupported format_version " +
                         std::to_string(version));

    const fs::path buses_path = dir / "buses.csv";
    std::ifstream bf(buses_path);
    if (!bf) throw NotFoundError(buses_path.string() + ": cannot open");
    std::string line;
    int lineno = 0;
    std::vector<Bus> buses;
    std::set<int> bus_ids;
    while (std::getline(bf, line)) {
        ++lineno;
        if (lineno == 1) {
            if (detail::split_csv_line(line) != std::vector<std::string>{"id", "demand_kw"})
                throw ParseError(buses_path.string() + ":1: bad header '" + line + "'");
            continue;
        }
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 2)
            throw ParseError(buses_path.string() + ":" + std::to_string(lineno) +
                             ": expected 2 fields, got " + std::to_string(f.size()));
        Bus b;
        b.id = static_cast<int>(detail::parse_int(f[0], buses_path.string(), lineno));
        b.demand_kw = detail::parse_real(f[1], buses_path.string(), lineno);
        if (!bus_ids.insert(b.id).second)
            throw ValidationError(buses_path.string() + ":" + std::to_string(lineno) +
                                  ": duplicate bus id " + std::to_string(b.id));
        buses.push_back(b);
    }

    const fs::path branches_path = dir / "branches.csv";
    std::ifstream rf(branches_path);
    if (!rf) throw NotFoundError(branches_path.string() + ": cannot open");
    lineno = 0;
    std::vector<Branch> branches;
    std::set<int> branch_ids;
    while (std::getline(rf, line)) {
        ++lineno;
        if (lineno == 1) {
            if (detail::split_csv_line(line) !=
                std::vector<std::string>{"id", "from", "to", "r_ohm", "x_ohm", "is_tie"})
                throw ParseError(branches_path.string() + ":1: bad header '" + line + "'");
            continue;
        }
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 6)
            throw ParseError(branches_path.string() + ":" + std::to_string(lineno) +
                             ": expected 6 fields, got " + std::to_string(f.size()));
        Branch b;
        b.id = static_cast<int>(detail::parse_int(f[0], branches_path.string(), lineno));
        b.from_bus = static_cast<int>(detail::parse_int(f[1], branches_path.string(), lineno));
        b.to_bus = static_cast<int>(detail::parse_int(f[2], branches_path.string(), lineno));
        b.resistance_ohm = detail::parse_real(f[3], branches_path.string(), lineno);
        b.reactance_ohm = detail::parse_real(f[4], branches_path.string(), lineno);
        long tie = detail::parse_int(f[5], branches_path.string(), lineno);
        if (tie != 0 && tie != 1)
            throw ParseError(branches_path.string() + ":" + std::to_string(lineno) +
                             ": is_tie must be 0 or 1");
        b.is_tie = tie == 1;
        if (!branch_ids.insert(b.id).second)
            throw ValidationError(branches_path.string() + ":" + std::to_string(lineno) +
                                  ": duplicate branch id " + std::to_string(b.id));
        branches.push_back(b);
    }

    return Network::create(name, std::move(buses), std::move(branches), root);
}

/// Writes the three dataset files. save + load round-trips exactly.
inline void save_network(const Network& net, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    {
        std::ofstream f(dir / "buses.csv");
        f << "id,demand_kw\n";
        for (const auto& b : net.buses) f << b.id << "," << fmt(b.demand_kw) << "\n";
    }
    {
        std::ofstream f(dir / "branches.csv");
        f << "id,from,to,r_ohm,x_ohm,is_tie\n";
        for (const auto& b : net.branches)
            f << b.id << "," << b.from_bus << "," << b.to_bus << "," << fmt(b.resistance_ohm)
              << "," << fmt(b.reactance_ohm) << "," << (b.is_tie ? 1 : 0) << "\n";
    }
    {
        std::ofstream f(dir / "manifest.json");
        f << "{\n  \"name\": \"" << net.name << "\",\n  \"root_bus\": " << net.root
          << ",\n  \"format_version\": 1\n}\n";
    }
}

/// All tie branches open: the feeders' normal operating state.
inline Configuration base_configuration(const Network& net) {
    std::vector<int> open;
    for (const auto& b : net.branches)
        if (b.is_tie) open.push_back(b.id);
    return Configuration(std::move(open));
}

/// Checks an open set against a network: valid distinct ids, exactly T of them.
inline void validate_configuration(const Network& net, const Configuration& cfg) {
    const int t = net.tie_count();
    if (static_cast<int>(cfg.open_edges.size()) != t)
        throw ValidationError("configuration must open exactly " + std::to_string(t) +
                              " edges, got " + std::to_string(cfg.open_edges.size()));
    int prev = 0;
    for (int id : cfg.open_edges) {
        if (id < 1 || id > net.branch_count())
            throw ValidationError("unknown branch id " + std::to_string(id));
        if (id == prev) throw ValidationError("duplicate branch id " + std::to_string(id));
        prev = id;
    }
}

}  // namespace gridconf
