#pragma once

#include "vineport/bicop.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace vineport {

enum class VineKind { CVine, DVine, RVine };

std::string_view vine_kind_name(VineKind k);
VineKind vine_kind_from_name(std::string_view name);

/// Pair-copula edge C_{a,b|cond}. Variables are 0-based.
struct VineEdge {
    int a = 0;
    int b = 0;
    std::vector<int> cond;  ///< sorted ascending
};

/// Regular vine structure stored as a lower-triangular matrix.
///
/// Column j has diagonal variable M(j,j). Row i > j of column j is the edge
/// in tree d-1-i (0-based) with conditioned pair {M(j,j), M(i,j)} and
/// conditioning set {M(i+1,j), ..., M(d-1,j)}. Entries above the diagonal
/// are -1.
struct VineStructure {
    VineKind kind = VineKind::RVine;
    Eigen::MatrixXi matrix;

    int dim() const { return static_cast<int>(matrix.rows()); }
    /// Edge of tree `t` stored in column `j` (j in [0, d-2-t]).
    VineEdge edge(int t, int j) const;
    /// All edges, grouped by tree; tree t lists columns 0..d-2-t in order.
    std::vector<std::vector<VineEdge>> trees() const;
};

VineStructure cvine_structure(const std::vector<int>& order);
VineStructure dvine_structure(const std::vector<int>& order);
/// Build the matrix form from edges grouped by tree. Throws when the edge
/// sets do not form a regular vine.
VineStructure structure_from_trees(const std::vector<std::vector<VineEdge>>& trees, VineKind kind, int dim);
/// Validate a given matrix (entries, column sets and proximity).
VineStructure structure_from_matrix(const Eigen::MatrixXi& m, VineKind kind);

/// Checks tree sizes, acyclicity and connectivity of each tree, and the
/// proximity condition. Returns an empty string when valid, otherwise a
/// description of the first violation.
std::string check_structure(const std::vector<std::vector<VineEdge>>& trees, int dim);

enum class DependenceMeasure { Kendall, Pearson };

struct VineFitOptions {
    std::vector<Family> families{kParametricFamilies.begin(), kParametricFamilies.end()};
    bool independence_test = true;
    double independence_level = 0.05;
    bool rotation_by_tau_sign = true;
    DependenceMeasure measure = DependenceMeasure::Kendall;
};

/// Order selection. For the R-vine kind this runs the sequential tree-by-tree
/// selection (trees after the first weigh edges on pseudo-observations of
/// fitted pair copulas), so `opts` matters.
VineStructure select_order(const Eigen::MatrixXd& u, VineKind kind, const VineFitOptions& opts = {});

enum class FitMethod { Sequential, JointMLE };

struct VineModel {
    VineStructure structure;
    /// specs[t][j]: copula of the edge of tree t in column j, oriented with
    /// the column's diagonal variable as first argument.
    std::vector<std::vector<BicopSpec>> specs;
    double loglik = 0.0;
    FitMethod method = FitMethod::Sequential;
    bool converged = true;
    std::vector<std::string> warnings;

    int dim() const { return structure.dim(); }
    int parameter_count() const;
};

/// All-independence model on the given structure.
VineModel independence_vine(const VineStructure& s);

/// Sequential estimation: per tree, select and fit each edge, then compute
/// the next tree's pseudo-observations through h-functions.
VineModel fit_sequential(const Eigen::MatrixXd& u, const VineStructure& s, const VineFitOptions& opts = {});

/// Structure selection followed by sequential estimation.
VineModel fit_vine(const Eigen::MatrixXd& u, VineKind kind, const VineFitOptions& opts = {});

/// Re-estimate parameters with families and rotations held fixed.
VineModel refit_parameters(const Eigen::MatrixXd& u, const VineModel& model);

double vine_loglik(const Eigen::MatrixXd& u, const VineModel& model);
/// Per-observation log density.
Eigen::VectorXd vine_log_density(const Eigen::MatrixXd& u, const VineModel& model);

struct JointMleOptions {
    int max_cycles = 50;
    double tol = 1e-6;
};

/// Coordinate-wise joint refinement of all edge parameters starting from a
/// fitted model. Never lowers the log-likelihood.
VineModel fit_joint_mle(const Eigen::MatrixXd& u, const VineModel& start, const JointMleOptions& opts = {});

/// Forward Rosenblatt transform: column x of the result is
/// F(u_x | variables processed after x in the simulation order).
Eigen::MatrixXd rosenblatt(const Eigen::MatrixXd& u, const VineModel& model);
/// Inverse of `rosenblatt`.
Eigen::MatrixXd inverse_rosenblatt(const Eigen::MatrixXd& w, const VineModel& model);

/// n x d sample; blocks of rows draw from derived seeds so output does not
/// depend on the thread count.
Eigen::MatrixXd vine_simulate(const VineModel& model, std::size_t n, std::uint64_t seed);

/// Swap the two arguments of a pair copula: C'(u1,u2) = C(u2,u1).
BicopSpec swap_arguments(const BicopSpec& s);

} // namespace vineport
