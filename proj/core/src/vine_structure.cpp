#include "vineport/vine.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace vineport {

namespace {

std::vector<int> complete_set(const VineEdge& e) {
    std::vector<int> s = e.cond;
    s.push_back(e.a);
    s.push_back(e.b);
    std::sort(s.begin(), s.end());
    return s;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

std::string edge_text(const VineEdge& e) {
    std::string s = std::to_string(e.a + 1) + "," + std::to_string(e.b + 1);
    if (!e.cond.empty()) {
        s += "|";
        for (std::size_t i = 0; i < e.cond.size(); ++i) s += (i ? "," : "") + std::to_string(e.cond[i] + 1);
    }
    return s;
}

void check_order(const std::vector<int>& order) {
    int d = static_cast<int>(order.size());
    if (d < 2) throw std::invalid_argument("vine needs at least 2 variables");
    std::vector<int> s = order;
    std::sort(s.begin(), s.end());
    for (int i = 0; i < d; ++i)
        if (s[i] != i) throw std::invalid_argument("variable order must be a permutation of 0..d-1");
}

} // namespace

std::string_view vine_kind_name(VineKind k) {
    switch (k) {
    case VineKind::CVine: return "cvine";
    case VineKind::DVine: return "dvine";
    case VineKind::RVine: return "rvine";
    }
    return "?";
}

VineKind vine_kind_from_name(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "cvine" || s == "c") return VineKind::CVine;
    if (s == "dvine" || s == "d") return VineKind::DVine;
    if (s == "rvine" || s == "r") return VineKind::RVine;
    throw std::invalid_argument("unknown vine kind '" + std::string(name) + "' (expected cvine, dvine or rvine)");
}

VineEdge VineStructure::edge(int t, int j) const {
    const int d = dim();
    if (t < 0 || t > d - 2 || j < 0 || j > d - 2 - t) throw std::out_of_range("vine edge index out of range");
    const int i = d - 1 - t;
    VineEdge e;
    e.a = matrix(j, j);
    e.b = matrix(i, j);
    for (int k = i + 1; k < d; ++k) e.cond.push_back(matrix(k, j));
    std::sort(e.cond.begin(), e.cond.end());
    return e;
}

std::vector<std::vector<VineEdge>> VineStructure::trees() const {
    const int d = dim();
    std::vector<std::vector<VineEdge>> out(static_cast<std::size_t>(std::max(d - 1, 0)));
    for (int t = 0; t + 1 < d; ++t)
        for (int j = 0; j <= d - 2 - t; ++j) out[t].push_back(edge(t, j));
    return out;
}

std::string check_structure(const std::vector<std::vector<VineEdge>>& trees, int d) {
    if (d < 2) return "dimension must be at least 2";
    if (static_cast<int>(trees.size()) != d - 1) return "expected " + std::to_string(d - 1) + " trees";
    for (int t = 0; t < d - 1; ++t) {
        const auto& tree = trees[t];
        if (static_cast<int>(tree.size()) != d - 1 - t)
            return "tree " + std::to_string(t + 1) + " must have " + std::to_string(d - 1 - t) + " edges";
        for (const auto& e : tree) {
            if (e.a == e.b || e.a < 0 || e.b < 0 || e.a >= d || e.b >= d) return "bad conditioned pair " + edge_text(e);
            if (static_cast<int>(e.cond.size()) != t) return "edge " + edge_text(e) + " has wrong conditioning size";
            if (!std::is_sorted(e.cond.begin(), e.cond.end()) ||
                std::adjacent_find(e.cond.begin(), e.cond.end()) != e.cond.end())
                return "conditioning set of " + edge_text(e) + " must be sorted and unique";
            for (int c : e.cond)
                if (c < 0 || c >= d || c == e.a || c == e.b) return "bad conditioning variable in " + edge_text(e);
        }
        if (t == 0) {
            UnionFind uf(d);
            for (const auto& e : tree)
                if (!uf.unite(e.a, e.b)) return "tree 1 contains a cycle at " + edge_text(e);
            continue;
        }
        const auto& prev = trees[t - 1];
        std::vector<std::vector<int>> nodes;
        for (const auto& e : prev) nodes.push_back(complete_set(e));
        UnionFind uf(static_cast<int>(nodes.size()));
        for (const auto& e : tree) {
            std::vector<int> sa = e.cond, sb = e.cond;
            sa.push_back(e.a);
            sb.push_back(e.b);
            std::sort(sa.begin(), sa.end());
            std::sort(sb.begin(), sb.end());
            auto ia = std::find(nodes.begin(), nodes.end(), sa) - nodes.begin();
            auto ib = std::find(nodes.begin(), nodes.end(), sb) - nodes.begin();
            if (ia == static_cast<long>(nodes.size()) || ib == static_cast<long>(nodes.size()))
                return "proximity condition fails for edge " + edge_text(e) + " in tree " + std::to_string(t + 1);
            if (!uf.unite(static_cast<int>(ia), static_cast<int>(ib)))
                return "tree " + std::to_string(t + 1) + " contains a cycle at " + edge_text(e);
        }
    }
    return {};
}

VineStructure structure_from_trees(const std::vector<std::vector<VineEdge>>& input, VineKind kind, int d) {
    std::vector<std::vector<VineEdge>> trees = input;
    for (auto& tree : trees)
        for (auto& e : tree) std::sort(e.cond.begin(), e.cond.end());
    if (auto err = check_structure(trees, d); !err.empty()) throw std::invalid_argument("invalid vine: " + err);

    Eigen::MatrixXi m = Eigen::MatrixXi::Constant(d, d, -1);
    std::vector<std::vector<bool>> used(trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t) used[t].assign(trees[t].size(), false);

    // Column j takes one conditioned variable of the single remaining edge of
    // tree d-2-j and peels one edge per tree below it.
    std::function<bool(int)> fill = [&](int j) -> bool {
        if (j == d - 1) {
            std::vector<bool> seen(static_cast<std::size_t>(d), false);
            for (int k = 0; k < j; ++k) seen[m(k, k)] = true;
            for (int v = 0; v < d; ++v)
                if (!seen[v]) m(j, j) = v;
            return true;
        }
        const int top = d - 2 - j;
        int idx = -1;
        for (std::size_t k = 0; k < trees[top].size(); ++k)
            if (!used[top][k]) idx = static_cast<int>(k);
        if (idx < 0) return false;
        const VineEdge& te = trees[top][idx];
        for (int x : {te.a, te.b}) {
            std::vector<std::pair<int, int>> taken;
            std::vector<int> rest = complete_set(te);
            rest.erase(std::find(rest.begin(), rest.end(), x));
            bool ok = true;
            for (int i = j + 1; i < d && ok; ++i) {
                const int t = d - 1 - i;
                ok = false;
                for (std::size_t k = 0; k < trees[t].size(); ++k) {
                    if (used[t][k]) continue;
                    const VineEdge& e = trees[t][k];
                    if (e.a != x && e.b != x) continue;
                    std::vector<int> cs = complete_set(e);
                    cs.erase(std::find(cs.begin(), cs.end(), x));
                    if (cs != rest) continue;
                    int y = e.a == x ? e.b : e.a;
                    m(i, j) = y;
                    rest.erase(std::find(rest.begin(), rest.end(), y));
                    used[t][k] = true;
                    taken.emplace_back(t, static_cast<int>(k));
                    ok = true;
                    break;
                }
            }
            if (ok) {
                m(j, j) = x;
                if (fill(j + 1)) return true;
            }
            for (auto [t, k] : taken) used[t][k] = false;
        }
        return false;
    };
    if (!fill(0)) throw std::invalid_argument("edge sets cannot be arranged as a vine matrix");
    VineStructure s{kind, m};
    return s;
}

VineStructure structure_from_matrix(const Eigen::MatrixXi& m, VineKind kind) {
    const int d = static_cast<int>(m.rows());
    if (d < 2 || m.cols() != d) throw std::invalid_argument("vine matrix must be square with d >= 2");
    std::vector<bool> diag(static_cast<std::size_t>(d), false);
    for (int j = 0; j < d; ++j) {
        int v = m(j, j);
        if (v < 0 || v >= d || diag[v]) throw std::invalid_argument("vine matrix diagonal must be a permutation");
        diag[v] = true;
    }
    for (int j = 0; j < d; ++j) {
        std::set<int> below, later;
        for (int i = j + 1; i < d; ++i) below.insert(m(i, j));
        for (int k = j + 1; k < d; ++k) later.insert(m(k, k));
        if (below != later || static_cast<int>(below.size()) != d - 1 - j)
            throw std::invalid_argument("vine matrix column " + std::to_string(j + 1) +
                                        " must hold the diagonal entries of later columns");
    }
    VineStructure s{kind, m};
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) s.matrix(i, j) = -1;
    if (auto err = check_structure(s.trees(), d); !err.empty()) throw std::invalid_argument("invalid vine: " + err);
    return s;
}

VineStructure cvine_structure(const std::vector<int>& order) {
    check_order(order);
    const int d = static_cast<int>(order.size());
    std::vector<std::vector<VineEdge>> trees(static_cast<std::size_t>(d - 1));
    for (int t = 0; t < d - 1; ++t) {
        std::vector<int> cond(order.begin(), order.begin() + t);
        std::sort(cond.begin(), cond.end());
        for (int k = t + 1; k < d; ++k) trees[t].push_back({order[t], order[k], cond});
    }
    return structure_from_trees(trees, VineKind::CVine, d);
}

VineStructure dvine_structure(const std::vector<int>& order) {
    check_order(order);
    const int d = static_cast<int>(order.size());
    std::vector<std::vector<VineEdge>> trees(static_cast<std::size_t>(d - 1));
    for (int t = 0; t < d - 1; ++t) {
        for (int k = 0; k + t + 1 < d; ++k) {
            std::vector<int> cond(order.begin() + k + 1, order.begin() + k + t + 1);
            std::sort(cond.begin(), cond.end());
            trees[t].push_back({order[k], order[k + t + 1], cond});
        }
    }
    return structure_from_trees(trees, VineKind::DVine, d);
}

} // namespace vineport
