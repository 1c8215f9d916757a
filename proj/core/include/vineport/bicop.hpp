#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vineport {

/// Bivariate copula families. Numeric values are the family codes used in
/// model files; rotations add 10 (180 degrees), 20 (90) or 30 (270).
enum class Family : int {
    Independence = 0,
    Gaussian = 1,
    StudentT = 2,
    Clayton = 3,
    Gumbel = 4,
    Frank = 5,
    Joe = 6,
    BB1 = 7,
    BB6 = 8,
    BB7 = 9,
    BB8 = 10,
};

inline constexpr std::array<Family, 10> kParametricFamilies = {
    Family::Gaussian, Family::StudentT, Family::Clayton, Family::Gumbel, Family::Frank,
    Family::Joe,      Family::BB1,      Family::BB6,     Family::BB7,    Family::BB8};

struct ParamBox {
    std::array<double, 2> lower{0.0, 0.0};
    std::array<double, 2> upper{0.0, 0.0};
};

int parameter_count(Family f);
ParamBox parameter_box(Family f);
/// 0 is always legal; 90/180/270 only for the Archimedean families with
/// positive-dependence generators (Clayton, Gumbel, Joe and the BB families).
bool rotation_allowed(Family f, int rotation);

std::string_view family_name(Family f);
std::optional<Family> family_from_name(std::string_view name);
int family_code(Family f, int rotation);
struct FamilyRotation {
    Family family = Family::Independence;
    int rotation = 0;
    friend bool operator==(const FamilyRotation&, const FamilyRotation&) = default;
};
FamilyRotation family_from_code(int code);

struct BicopSpec {
    Family family = Family::Independence;
    int rotation = 0;
    std::array<double, 2> params{0.0, 0.0};  ///< (rho, nu) elliptical, (theta, delta) Archimedean

    int code() const { return family_code(family, rotation); }
    friend bool operator==(const BicopSpec&, const BicopSpec&) = default;
};

/// Throws std::invalid_argument when parameters leave the family box or the
/// rotation is illegal for the family.
void validate(const BicopSpec& spec);

/// Evaluator with parameter-dependent constants precomputed. Inputs are
/// clamped to [1e-10, 1 - 1e-10].
///
/// Conventions: hfunc1(u1, u2) = dC/du1 = P(U2 <= u2 | U1 = u1) and
/// hfunc2(u1, u2) = dC/du2 = P(U1 <= u1 | U2 = u2). hinv1 inverts hfunc1 in
/// u2, hinv2 inverts hfunc2 in u1.
class Bicop {
public:
    explicit Bicop(const BicopSpec& spec);

    const BicopSpec& spec() const { return spec_; }

    double cdf(double u1, double u2) const;
    double pdf(double u1, double u2) const;
    double log_pdf(double u1, double u2) const;
    double hfunc1(double u1, double u2) const;
    double hfunc2(double u1, double u2) const;
    double hinv1(double w, double u1) const;
    double hinv2(double w, double u2) const;

    /// Sum of log densities over paired observations.
    double loglik(std::span<const double> u1, std::span<const double> u2) const;
    /// Batch h-functions; either output may be empty to skip it.
    void hfuncs(std::span<const double> u1, std::span<const double> u2, std::span<double> h1,
                std::span<double> h2) const;

private:
    struct Base;
    double base_cdf(double u, double v) const;
    double base_log_pdf(double u, double v) const;
    double base_h(double u, double v) const;       // dC(u,v)/dv
    double base_hinv(double w, double v) const;    // solves base_h(u, v) = w for u
    double elliptical_log_pdf_q(double x, double y) const;
    double elliptical_h_q(double x, double y) const;  // quantile-space h(u|v)
    double quantile(double u) const;
    double marginal_cdf(double x) const;

    BicopSpec spec_;
    double rho_ = 0.0, nu_ = 0.0, theta_ = 0.0, delta_ = 0.0;
    double one_minus_rho2_ = 1.0;
    double t_log_const_ = 0.0;
    double frank_em1_ = 0.0;  // expm1(-theta)
    double bb8_log_eta_ = 0.0;
};

double bicop_cdf(double u1, double u2, const BicopSpec& spec);
double bicop_pdf(double u1, double u2, const BicopSpec& spec);
/// h(u | v) = dC(u, v)/dv.
double hfunc(double u, double v, const BicopSpec& spec);
/// Inverse of hfunc in its first argument.
double hfunc_inv(double w, double v, const BicopSpec& spec);

/// Kendall's tau implied by the parameters.
double param_to_tau(const BicopSpec& spec);
/// Parameters reproducing `tau`. Two-parameter Archimedean families are
/// solved on the one-parameter boundary that spans their full tau range
/// (BB1 and BB8 with delta = 1, BB6 and BB7 with theta = 1); the Student-t
/// keeps `nu`. Throws std::domain_error when tau is outside the achievable range.
BicopSpec tau_to_param(Family family, int rotation, double tau, double nu = 8.0);

struct TailDependence {
    double lower = 0.0;
    double upper = 0.0;
};
TailDependence tail_dependence(const BicopSpec& spec);

/// n x 2 sample by conditional inversion: u1 = w1, u2 = hinv1(w2 | u1).
Eigen::MatrixXd bicop_sample(std::size_t n, const BicopSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------- fitting --

struct BicopFit {
    BicopSpec spec;
    double loglik = 0.0;
    double aic = 0.0;
    std::size_t n = 0;
    bool converged = true;
};

/// Maximum likelihood within the family box, started from tau inversion.
/// Throws on n < 30 or when more than half of either margin is tied.
BicopFit fit_bicop(std::span<const double> u1, std::span<const double> u2, Family family, int rotation = 0);

/// Refit the parameters of an existing spec (family and rotation fixed).
BicopFit refit_bicop(std::span<const double> u1, std::span<const double> u2, const BicopSpec& spec);

struct SelectionOptions {
    std::vector<Family> families{kParametricFamilies.begin(), kParametricFamilies.end()};
    bool independence_test = true;
    double independence_level = 0.05;
    /// Restrict rotations by the sign of the empirical tau (0/180 for
    /// positive, 90/270 for negative dependence).
    bool rotation_by_tau_sign = true;
};

/// Asymptotic Kendall-tau independence test; true when independence is rejected.
bool reject_independence(double tau, std::size_t n, double level = 0.05);

/// AIC selection over the candidate families and their legal rotations.
BicopFit select_bicop(std::span<const double> u1, std::span<const double> u2, const SelectionOptions& opts = {});
/// AIC selection over an explicit candidate list.
BicopFit select_bicop(std::span<const double> u1, std::span<const double> u2,
                      std::span<const FamilyRotation> candidates, bool independence_test = true,
                      double independence_level = 0.05);

/// Candidate (family, rotation) pairs for the given families.
std::vector<FamilyRotation> expand_candidates(std::span<const Family> families, std::optional<double> tau_sign = {});

} // namespace vineport
