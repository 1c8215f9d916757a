#pragma once

#include "vineport/bicop.hpp"
#include "vineport/marginals.hpp"
#include "vineport/rng.hpp"
#include "vineport/vine.hpp"

#include <iterator>
#include <vector>

namespace fixtures {

using namespace vineport;

// Every family with each legal rotation at moderate parameters.
inline std::vector<BicopSpec> copula_catalogue() {
    std::vector<BicopSpec> base = {
        {Family::Gaussian, 0, {0.5, 0}},  {Family::Gaussian, 0, {-0.4, 0}}, {Family::StudentT, 0, {0.5, 5}},
        {Family::StudentT, 0, {-0.3, 9}}, {Family::Clayton, 0, {2.0, 0}},   {Family::Gumbel, 0, {1.8, 0}},
        {Family::Frank, 0, {4.0, 0}},     {Family::Frank, 0, {-4.0, 0}},    {Family::Joe, 0, {2.0, 0}},
        {Family::BB1, 0, {0.8, 1.5}},     {Family::BB6, 0, {1.5, 1.4}},     {Family::BB7, 0, {1.6, 1.2}},
        {Family::BB8, 0, {3.0, 0.8}},
    };
    std::vector<BicopSpec> out;
    for (const auto& s : base)
        for (int rot : {0, 90, 180, 270})
            if (rotation_allowed(s.family, rot)) out.push_back({s.family, rot, s.params});
    return out;
}

// A regular vine on four variables that is neither a C- nor a D-vine.
inline std::vector<std::vector<VineEdge>> mixed_trees() {
    return {{{0, 1, {}}, {1, 2, {}}, {1, 3, {}}}, {{0, 2, {1}}, {2, 3, {1}}}, {{0, 3, {1, 2}}}};
}

inline BicopSpec random_spec(Rng& rng) {
    static const Family fams[] = {Family::Gaussian, Family::StudentT, Family::Clayton, Family::Gumbel,
                                  Family::Frank,    Family::Joe,      Family::BB1,     Family::BB7};
    const Family f = fams[rng.index(std::size(fams))];
    double tau = 0.1 + 0.6 * rng.uniform();
    int rot = 0;
    if (rotation_allowed(f, 90)) {
        rot = 90 * static_cast<int>(rng.index(4));
        if (rot == 90 || rot == 270) tau = -tau;
    } else if (rng.uniform() < 0.4) {
        tau = -tau;
    }
    BicopSpec s = tau_to_param(f, rot, tau, 4 + 6 * rng.uniform());
    if (f == Family::BB1) s.params = {0.3 + rng.uniform(), 1.0 + rng.uniform()};
    if (f == Family::BB7) s.params = {1.0 + rng.uniform(), 0.2 + rng.uniform()};
    return s;
}

inline VineModel random_model(const VineStructure& st, Rng& rng) {
    VineModel m = independence_vine(st);
    for (auto& tree : m.specs)
        for (auto& s : tree) s = random_spec(rng);
    return m;
}

inline std::vector<VineStructure> small_structures() {
    return {cvine_structure({0, 1, 2}), dvine_structure({2, 0, 1}), cvine_structure({2, 0, 3, 1}),
            dvine_structure({1, 3, 0, 2}), structure_from_trees(mixed_trees(), VineKind::RVine, 4)};
}

inline ArGarchParams garch_truth() {
    ArGarchParams p;
    p.mu = 0.03;
    p.phi = 0.05;
    p.omega = 0.05;
    p.alpha = 0.08;
    p.beta = 0.90;
    p.skewt = {0.9, 7.0};
    return p;
}

} // namespace fixtures
