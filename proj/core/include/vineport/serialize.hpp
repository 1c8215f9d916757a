#pragma once

#include "vineport/marginals.hpp"
#include "vineport/vine.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace vineport {

/// Vine model as JSON. The structure matrix is written 1-based with zeros
/// above the diagonal; doubles round-trip exactly.
std::string vine_model_to_json(const VineModel& m);
VineModel vine_model_from_json(const std::string& text);

struct NamedMarginal {
    std::string asset;
    MarginalFit fit;   ///< filtered state only; variances/residuals are not stored
};
std::string marginals_to_json(const std::vector<NamedMarginal>& fits);
std::vector<NamedMarginal> marginals_from_json(const std::string& text);

/// Numeric matrix CSV with a header row; values at full precision.
void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* header = nullptr);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace vineport
