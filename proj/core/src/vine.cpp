#include "vineport/vine.hpp"

#include "vineport/parallel.hpp"
#include "vineport/optim.hpp"
#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace vineport {

namespace {

using Key = std::pair<int, std::uint64_t>;
using Store = std::map<Key, std::vector<double>>;

std::uint64_t mask_of(const std::vector<int>& vars) {
    std::uint64_t m = 0;
    for (int v : vars) m |= std::uint64_t{1} << v;
    return m;
}

std::uint64_t bit(int v) { return std::uint64_t{1} << v; }

const std::vector<double>& fetch(const Store& s, int var, std::uint64_t mask) {
    auto it = s.find({var, mask});
    if (it == s.end()) throw std::logic_error("vine: missing conditional distribution values");
    return it->second;
}

void check_input(const Eigen::MatrixXd& u, int d) {
    if (u.cols() != d)
        throw std::invalid_argument("data has " + std::to_string(u.cols()) + " columns, model expects " +
                                    std::to_string(d));
}

Store initial_store(const Eigen::MatrixXd& u) {
    Store s;
    const auto n = static_cast<std::size_t>(u.rows());
    for (int v = 0; v < u.cols(); ++v) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = std::clamp(u(static_cast<Eigen::Index>(i), v), 1e-10, 1 - 1e-10);
        s[{v, 0}] = std::move(col);
    }
    return s;
}

// Evaluates trees [t_begin, d-1) into the store, writing h-values needed by
// later trees (and by the last tree when `all_h`). Returns per-edge logliks.
std::vector<std::vector<double>> forward(Store& store, const VineModel& m, int t_begin, bool all_h) {
    const int d = m.dim();
    std::vector<std::vector<double>> ll(static_cast<std::size_t>(d - 1));
    for (int t = t_begin; t < d - 1; ++t) {
        const int edges = d - 1 - t;
        ll[t].assign(static_cast<std::size_t>(edges), 0.0);
        const bool need_h = all_h || t < d - 2;
        std::vector<VineEdge> es(static_cast<std::size_t>(edges));
        for (int j = 0; j < edges; ++j) es[j] = m.structure.edge(t, j);
        // make output slots before parallel work so the map is not mutated concurrently
        std::vector<std::vector<double>*> h1(edges, nullptr), h2(edges, nullptr);
        std::size_t n = store.begin()->second.size();
        if (need_h) {
            for (int j = 0; j < edges; ++j) {
                const auto mk = mask_of(es[j].cond);
                h2[j] = &store[{es[j].a, mk | bit(es[j].b)}];
                h1[j] = &store[{es[j].b, mk | bit(es[j].a)}];
                h2[j]->resize(n);
                h1[j]->resize(n);
            }
        }
        parallel_for(static_cast<std::size_t>(edges), [&](std::size_t j) {
            const auto& e = es[j];
            const auto mk = mask_of(e.cond);
            const auto& u1 = fetch(store, e.a, mk);
            const auto& u2 = fetch(store, e.b, mk);
            Bicop cop(m.specs[t][j]);
            ll[t][j] = cop.loglik(u1, u2);
            if (need_h) cop.hfuncs(u1, u2, *h1[j], *h2[j]);
        });
    }
    return ll;
}

double total(const std::vector<std::vector<double>>& ll, int from = 0) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(from); t < ll.size(); ++t)
        for (double v : ll[t]) s += v;
    return s;
}

SelectionOptions selection_options(const VineFitOptions& o) {
    SelectionOptions s;
    s.families = o.families;
    s.independence_test = o.independence_test;
    s.independence_level = o.independence_level;
    s.rotation_by_tau_sign = o.rotation_by_tau_sign;
    return s;
}

double dependence(std::span<const double> x, std::span<const double> y, DependenceMeasure m) {
    if (m == DependenceMeasure::Kendall) return stats::kendall_tau(x, y);
    const double mx = stats::mean(x), my = stats::mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

Eigen::MatrixXd dependence_matrix(const Eigen::MatrixXd& u, DependenceMeasure m) {
    const auto d = u.cols();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) w(i, j) = w(j, i) = std::abs(dependence(stats::col(u, i), stats::col(u, j), m));
    return w;
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(static_cast<std::size_t>(n)) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        p[a] = b;
        return true;
    }
};

struct FittedEdge {
    VineEdge edge;
    BicopFit fit;
    std::string warning;
};

FittedEdge fit_edge(const std::vector<double>& u1, const std::vector<double>& u2, const VineEdge& e,
                    const SelectionOptions& sel) {
    FittedEdge out{e, {}, {}};
    try {
        out.fit = select_bicop(u1, u2, sel);
    } catch (const std::exception& ex) {
        out.fit = BicopFit{};
        out.fit.n = u1.size();
        out.warning = "edge " + std::to_string(e.a + 1) + "," + std::to_string(e.b + 1) +
                      " set to Independence: " + ex.what();
    }
    return out;
}

std::vector<int> cvine_order(const Eigen::MatrixXd& w) {
    const int d = static_cast<int>(w.rows());
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorXd score = w.rowwise().sum();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score(a) > score(b); });
    return order;
}

std::vector<int> dvine_order(const Eigen::MatrixXd& w) {
    const int d = static_cast<int>(w.rows());
    int bi = 0, bj = 1;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (w(i, j) > w(bi, bj)) {
                bi = i;
                bj = j;
            }
    std::vector<int> path{bi, bj};
    std::vector<bool> in(static_cast<std::size_t>(d), false);
    in[bi] = in[bj] = true;
    while (static_cast<int>(path.size()) < d) {
        double best = -1;
        int who = -1;
        bool front = false;
        for (int v = 0; v < d; ++v) {
            if (in[v]) continue;
            if (w(path.back(), v) > best) {
                best = w(path.back(), v);
                who = v;
                front = false;
            }
            if (w(path.front(), v) > best) {
                best = w(path.front(), v);
                who = v;
                front = true;
            }
        }
        if (front)
            path.insert(path.begin(), who);
        else
            path.push_back(who);
        in[who] = true;
    }
    return path;
}

// Tree-by-tree maximum spanning trees with pair copulas fitted along the way.
std::pair<VineStructure, std::vector<FittedEdge>> dissmann(const Eigen::MatrixXd& u, const VineFitOptions& opts) {
    const int d = static_cast<int>(u.cols());
    Store store = initial_store(u);
    const auto sel = selection_options(opts);
    std::vector<std::vector<VineEdge>> trees(static_cast<std::size_t>(d - 1));
    std::vector<FittedEdge> fitted;
    std::vector<std::vector<int>> prev_sets;  // complete sets of the previous tree's edges
    for (int t = 0; t < d - 1; ++t) {
        struct Cand {
            double w;
            int p, q;
            VineEdge e;
        };
        std::vector<Cand> cands;
        if (t == 0) {
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j)
                    cands.push_back({std::abs(dependence(fetch(store, i, 0), fetch(store, j, 0), opts.measure)), i, j,
                                     VineEdge{i, j, {}}});
        } else {
            for (std::size_t p = 0; p < prev_sets.size(); ++p) {
                for (std::size_t q = p + 1; q < prev_sets.size(); ++q) {
                    std::vector<int> inter;
                    std::set_intersection(prev_sets[p].begin(), prev_sets[p].end(), prev_sets[q].begin(),
                                          prev_sets[q].end(), std::back_inserter(inter));
                    if (static_cast<int>(inter.size()) != t) continue;
                    std::vector<int> da, db;
                    std::set_difference(prev_sets[p].begin(), prev_sets[p].end(), inter.begin(), inter.end(),
                                        std::back_inserter(da));
                    std::set_difference(prev_sets[q].begin(), prev_sets[q].end(), inter.begin(), inter.end(),
                                        std::back_inserter(db));
                    int a = da[0], b = db[0];
                    if (a > b) std::swap(a, b);
                    auto mk = mask_of(inter);
                    auto ia = store.find({a, mk}), ib = store.find({b, mk});
                    if (ia == store.end() || ib == store.end()) continue;
                    cands.push_back({std::abs(dependence(ia->second, ib->second, opts.measure)), static_cast<int>(p),
                                     static_cast<int>(q), VineEdge{a, b, inter}});
                }
            }
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.w > y.w; });
        const int nodes = t == 0 ? d : static_cast<int>(prev_sets.size());
        UnionFind uf(nodes);
        for (const auto& c : cands) {
            if (static_cast<int>(trees[t].size()) == d - 1 - t) break;
            if (uf.unite(c.p, c.q)) trees[t].push_back(c.e);
        }
        if (static_cast<int>(trees[t].size()) != d - 1 - t)
            throw std::runtime_error("R-vine selection could not build tree " + std::to_string(t + 1));

        const auto& tree = trees[t];
        std::vector<FittedEdge> level(tree.size());
        parallel_for(tree.size(), [&](std::size_t k) {
            const auto mk = mask_of(tree[k].cond);
            level[k] = fit_edge(fetch(store, tree[k].a, mk), fetch(store, tree[k].b, mk), tree[k], sel);
        });
        prev_sets.clear();
        for (auto& fe : level) {
            const auto& e = fe.edge;
            const auto mk = mask_of(e.cond);
            if (t < d - 2) {
                const auto& u1 = fetch(store, e.a, mk);
                const auto& u2 = fetch(store, e.b, mk);
                std::vector<double> h1(u1.size()), h2(u1.size());
                Bicop(fe.fit.spec).hfuncs(u1, u2, h1, h2);
                store[{e.a, mk | bit(e.b)}] = std::move(h2);
                store[{e.b, mk | bit(e.a)}] = std::move(h1);
            }
            std::vector<int> cs = e.cond;
            cs.push_back(e.a);
            cs.push_back(e.b);
            std::sort(cs.begin(), cs.end());
            prev_sets.push_back(cs);
            fitted.push_back(std::move(fe));
        }
    }
    return {structure_from_trees(trees, VineKind::RVine, d), std::move(fitted)};
}

VineModel assemble(const VineStructure& s, const std::vector<FittedEdge>& fitted) {
    VineModel m = independence_vine(s);
    m.loglik = 0.0;
    for (int t = 0; t < s.dim() - 1; ++t) {
        for (int j = 0; j <= s.dim() - 2 - t; ++j) {
            VineEdge e = s.edge(t, j);
            auto it = std::find_if(fitted.begin(), fitted.end(), [&](const FittedEdge& f) {
                return f.edge.cond == e.cond && ((f.edge.a == e.a && f.edge.b == e.b) || (f.edge.a == e.b && f.edge.b == e.a));
            });
            if (it == fitted.end()) throw std::logic_error("vine assembly: edge not found");
            m.specs[t][j] = it->edge.a == e.a ? it->fit.spec : swap_arguments(it->fit.spec);
            m.loglik += it->fit.loglik;
            if (!it->warning.empty()) m.warnings.push_back(it->warning);
        }
    }
    return m;
}

} // namespace

BicopSpec swap_arguments(const BicopSpec& s) {
    BicopSpec out = s;
    if (s.rotation == 90) out.rotation = 270;
    else if (s.rotation == 270) out.rotation = 90;
    return out;
}

int VineModel::parameter_count() const {
    int k = 0;
    for (const auto& tree : specs)
        for (const auto& s : tree) k += vineport::parameter_count(s.family);
    return k;
}

VineModel independence_vine(const VineStructure& s) {
    VineModel m;
    m.structure = s;
    const int d = s.dim();
    m.specs.resize(static_cast<std::size_t>(std::max(d - 1, 0)));
    for (int t = 0; t < d - 1; ++t) m.specs[t].assign(static_cast<std::size_t>(d - 1 - t), BicopSpec{});
    return m;
}

VineStructure select_order(const Eigen::MatrixXd& u, VineKind kind, const VineFitOptions& opts) {
    if (u.cols() < 2) throw std::invalid_argument("select_order: need at least 2 variables");
    if (u.cols() > 64) throw std::invalid_argument("select_order: at most 64 variables are supported");
    switch (kind) {
    case VineKind::CVine: return cvine_structure(cvine_order(dependence_matrix(u, opts.measure)));
    case VineKind::DVine: return dvine_structure(dvine_order(dependence_matrix(u, opts.measure)));
    case VineKind::RVine: return dissmann(u, opts).first;
    }
    throw std::invalid_argument("unknown vine kind");
}

VineModel fit_sequential(const Eigen::MatrixXd& u, const VineStructure& s, const VineFitOptions& opts) {
    const int d = s.dim();
    check_input(u, d);
    if (u.rows() < 30) throw std::invalid_argument("fit_sequential: need at least 30 observations");
    Store store = initial_store(u);
    const auto sel = selection_options(opts);
    std::vector<FittedEdge> fitted;
    for (int t = 0; t < d - 1; ++t) {
        const int edges = d - 1 - t;
        std::vector<FittedEdge> level(static_cast<std::size_t>(edges));
        parallel_for(static_cast<std::size_t>(edges), [&](std::size_t j) {
            VineEdge e = s.edge(t, static_cast<int>(j));
            const auto mk = mask_of(e.cond);
            level[j] = fit_edge(fetch(store, e.a, mk), fetch(store, e.b, mk), e, sel);
        });
        if (t < d - 2) {
            for (auto& fe : level) {
                const auto& e = fe.edge;
                const auto mk = mask_of(e.cond);
                const auto& u1 = fetch(store, e.a, mk);
                const auto& u2 = fetch(store, e.b, mk);
                std::vector<double> h1(u1.size()), h2(u1.size());
                Bicop(fe.fit.spec).hfuncs(u1, u2, h1, h2);
                store[{e.a, mk | bit(e.b)}] = std::move(h2);
                store[{e.b, mk | bit(e.a)}] = std::move(h1);
            }
        }
        for (auto& fe : level) fitted.push_back(std::move(fe));
    }
    return assemble(s, fitted);
}

VineModel fit_vine(const Eigen::MatrixXd& u, VineKind kind, const VineFitOptions& opts) {
    if (u.cols() < 2) throw std::invalid_argument("fit_vine: need at least 2 variables");
    if (u.rows() < 30) throw std::invalid_argument("fit_vine: need at least 30 observations");
    if (kind == VineKind::RVine) {
        auto [s, fitted] = dissmann(u, opts);
        return assemble(s, fitted);
    }
    return fit_sequential(u, select_order(u, kind, opts), opts);
}

VineModel refit_parameters(const Eigen::MatrixXd& u, const VineModel& model) {
    const int d = model.dim();
    check_input(u, d);
    Store store = initial_store(u);
    VineModel out = model;
    out.loglik = 0.0;
    out.method = FitMethod::Sequential;
    for (int t = 0; t < d - 1; ++t) {
        const int edges = d - 1 - t;
        std::vector<double> ll(static_cast<std::size_t>(edges), 0.0);
        parallel_for(static_cast<std::size_t>(edges), [&](std::size_t j) {
            VineEdge e = model.structure.edge(t, static_cast<int>(j));
            const auto mk = mask_of(e.cond);
            const auto& u1 = fetch(store, e.a, mk);
            const auto& u2 = fetch(store, e.b, mk);
            const BicopSpec& cur = model.specs[t][j];
            if (cur.family == Family::Independence) return;
            try {
                BicopFit f = refit_bicop(u1, u2, cur);
                // Student-t may collapse to Gaussian at the nu cap; keep the family fixed
                if (f.spec.family == cur.family) {
                    out.specs[t][j] = f.spec;
                    ll[j] = f.loglik;
                } else {
                    ll[j] = Bicop(cur).loglik(u1, u2);
                }
            } catch (const std::exception&) {
                ll[j] = Bicop(cur).loglik(u1, u2);
            }
        });
        for (double v : ll) out.loglik += v;
        if (t < d - 2) {
            for (int j = 0; j < edges; ++j) {
                VineEdge e = model.structure.edge(t, j);
                const auto mk = mask_of(e.cond);
                const auto& u1 = fetch(store, e.a, mk);
                const auto& u2 = fetch(store, e.b, mk);
                std::vector<double> h1(u1.size()), h2(u1.size());
                Bicop(out.specs[t][j]).hfuncs(u1, u2, h1, h2);
                store[{e.a, mk | bit(e.b)}] = std::move(h2);
                store[{e.b, mk | bit(e.a)}] = std::move(h1);
            }
        }
    }
    return out;
}

double vine_loglik(const Eigen::MatrixXd& u, const VineModel& model) {
    check_input(u, model.dim());
    Store store = initial_store(u);
    return total(forward(store, model, 0, false));
}

Eigen::VectorXd vine_log_density(const Eigen::MatrixXd& u, const VineModel& model) {
    const int d = model.dim();
    check_input(u, d);
    Store store = initial_store(u);
    forward(store, model, 0, false);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u.rows());
    for (int t = 0; t < d - 1; ++t) {
        for (int j = 0; j <= d - 2 - t; ++j) {
            VineEdge e = model.structure.edge(t, j);
            const auto mk = mask_of(e.cond);
            const auto& u1 = fetch(store, e.a, mk);
            const auto& u2 = fetch(store, e.b, mk);
            Bicop cop(model.specs[t][j]);
            if (model.specs[t][j].family == Family::Independence) continue;
            for (Eigen::Index i = 0; i < u.rows(); ++i) out(i) += cop.log_pdf(u1[i], u2[i]);
        }
    }
    return out;
}

VineModel fit_joint_mle(const Eigen::MatrixXd& u, const VineModel& start, const JointMleOptions& opts) {
    const int d = start.dim();
    check_input(u, d);
    VineModel m = start;
    m.method = FitMethod::JointMLE;
    Store store = initial_store(u);
    auto ll = forward(store, m, 0, false);
    double current = total(ll);
    if (!std::isfinite(current)) {
        m.converged = false;
        m.warnings.push_back("joint MLE skipped: starting log-likelihood is not finite");
        return m;
    }
    struct Coord {
        int t, j, k;
    };
    std::vector<Coord> coords;
    for (int t = 0; t < d - 1; ++t)
        for (int j = 0; j <= d - 2 - t; ++j)
            for (int k = 0; k < parameter_count(m.specs[t][j].family); ++k) coords.push_back({t, j, k});
    m.converged = coords.empty();
    for (int cycle = 0; cycle < opts.max_cycles && !coords.empty(); ++cycle) {
        const double before = current;
        for (const auto& c : coords) {
            // trees below c.t are unaffected by this coordinate
            double fixed = 0.0;
            for (int t = 0; t < c.t; ++t)
                for (double v : ll[t]) fixed += v;
            BicopSpec& spec = m.specs[c.t][c.j];
            const double old = spec.params[c.k];
            auto box = parameter_box(spec.family);
            auto f = [&](double x) {
                spec.params[c.k] = x;
                auto part = forward(store, m, c.t, false);
                double v = fixed + total(part, c.t);
                return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
            };
            auto r = optim::brent_minimize(f, box.lower[c.k], box.upper[c.k], 30, 80);
            if (-r.fx > current) {
                spec.params[c.k] = r.x;
                current = -r.fx;
            } else {
                spec.params[c.k] = old;
            }
            store = initial_store(u);
            ll = forward(store, m, 0, false);
            current = total(ll);
        }
        if (current - before < opts.tol) {
            m.converged = true;
            break;
        }
    }
    m.loglik = current;
    if (!m.converged) m.warnings.push_back("joint MLE stopped at the cycle limit");
    return m;
}

Eigen::MatrixXd rosenblatt(const Eigen::MatrixXd& u, const VineModel& model) {
    const int d = model.dim();
    check_input(u, d);
    Store store = initial_store(u);
    forward(store, model, 0, true);
    const auto& M = model.structure.matrix;
    Eigen::MatrixXd w(u.rows(), d);
    for (int j = 0; j < d; ++j) {
        const int x = M(j, j);
        std::uint64_t mk = 0;
        for (int i = j + 1; i < d; ++i) mk |= bit(M(i, j));
        const auto& col = fetch(store, x, mk);
        for (Eigen::Index i = 0; i < u.rows(); ++i) w(i, x) = col[i];
    }
    return w;
}

Eigen::MatrixXd inverse_rosenblatt(const Eigen::MatrixXd& w, const VineModel& model) {
    const int d = model.dim();
    check_input(w, d);
    const auto n = static_cast<std::size_t>(w.rows());
    const auto& M = model.structure.matrix;
    Store store;
    Eigen::MatrixXd u(w.rows(), d);
    for (int j = d - 1; j >= 0; --j) {
        const int x = M(j, j);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(w(static_cast<Eigen::Index>(i), x), 1e-10, 1 - 1e-10);
        // levels[i] = F(x | rows i+1.. of column j) for i = j..d-1
        std::vector<std::vector<double>> levels(static_cast<std::size_t>(d));
        levels[j] = v;
        for (int i = j + 1; i < d; ++i) {
            const int t = d - 1 - i;
            const int y = M(i, j);
            std::uint64_t mk = 0;
            for (int k = i + 1; k < d; ++k) mk |= bit(M(k, j));
            const auto& fy = fetch(store, y, mk);
            Bicop cop(model.specs[t][j]);
            for (std::size_t r = 0; r < n; ++r) v[r] = cop.hinv2(v[r], fy[r]);
            levels[i] = v;
        }
        for (std::size_t r = 0; r < n; ++r) u(static_cast<Eigen::Index>(r), x) = v[r];
        store[{x, 0}] = v;
        {
            std::uint64_t all = 0;
            for (int k = j + 1; k < d; ++k) all |= bit(M(k, j));
            if (all) store[{x, all}] = levels[j];
        }
        for (int i = d - 1; i > j; --i) {
            const int t = d - 1 - i;
            const int y = M(i, j);
            std::uint64_t mk = 0;
            for (int k = i + 1; k < d; ++k) mk |= bit(M(k, j));
            const auto& fx = levels[i];
            store[{x, mk}] = fx;
            const auto& fy = fetch(store, y, mk);
            std::vector<double> h1(n);
            Bicop(model.specs[t][j]).hfuncs(fx, fy, h1, {});
            store[{y, mk | bit(x)}] = std::move(h1);
        }
    }
    return u;
}

Eigen::MatrixXd vine_simulate(const VineModel& model, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("vine_simulate: n must be positive");
    const int d = model.dim();
    constexpr std::size_t block = 2048;
    const std::size_t blocks = (n + block - 1) / block;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * block, rows = std::min(block, n - lo);
        Rng rng(derive_seed(seed, "vine-simulate", b));
        Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), d);
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (int k = 0; k < d; ++k) w(i, k) = rng.uniform();
        out.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(rows)) = inverse_rosenblatt(w, model);
    });
    return out;
}

} // namespace vineport
