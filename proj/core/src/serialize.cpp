#include "vineport/serialize.hpp"

#include "vineport/panel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vineport {

using nlohmann::json;

namespace {

std::string method_name(FitMethod m) { return m == FitMethod::JointMLE ? "joint_mle" : "sequential"; }

FitMethod method_from(const std::string& s) {
    if (s == "sequential") return FitMethod::Sequential;
    if (s == "joint_mle") return FitMethod::JointMLE;
    throw std::runtime_error("vine model: unknown fit method '" + s + "'");
}

} // namespace

std::string vine_model_to_json(const VineModel& m) {
    const int d = m.dim();
    json j;
    j["kind"] = std::string(vine_kind_name(m.structure.kind));
    j["dim"] = d;
    json mat = json::array();
    for (int r = 0; r < d; ++r) {
        json row = json::array();
        for (int c = 0; c < d; ++c) row.push_back(r >= c ? m.structure.matrix(r, c) + 1 : 0);
        mat.push_back(row);
    }
    j["matrix"] = mat;
    json trees = json::array();
    for (const auto& tree : m.specs) {
        json edges = json::array();
        for (const auto& s : tree) {
            std::vector<double> par(s.params.begin(), s.params.begin() + parameter_count(s.family));
            edges.push_back({{"family", std::string(family_name(s.family))}, {"rotation", s.rotation}, {"params", par}});
        }
        trees.push_back(edges);
    }
    j["pair_copulas"] = trees;
    j["loglik"] = m.loglik;
    j["method"] = method_name(m.method);
    j["converged"] = m.converged;
    j["warnings"] = m.warnings;
    return j.dump(2) + "\n";
}

VineModel vine_model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("vine model: invalid JSON: ") + e.what());
    }
    try {
        const int d = j.at("dim").get<int>();
        Eigen::MatrixXi mat(d, d);
        const auto& rows = j.at("matrix");
        if (static_cast<int>(rows.size()) != d) throw std::runtime_error("vine model: matrix has wrong size");
        for (int r = 0; r < d; ++r) {
            if (static_cast<int>(rows[r].size()) != d) throw std::runtime_error("vine model: matrix has wrong size");
            for (int c = 0; c < d; ++c) mat(r, c) = rows[r][c].get<int>() - 1;
        }
        VineModel m;
        m.structure = structure_from_matrix(mat, vine_kind_from_name(j.at("kind").get<std::string>()));
        const auto& trees = j.at("pair_copulas");
        if (static_cast<int>(trees.size()) != d - 1) throw std::runtime_error("vine model: wrong number of trees");
        for (int t = 0; t < d - 1; ++t) {
            const auto& edges = trees[t];
            if (static_cast<int>(edges.size()) != d - 1 - t) throw std::runtime_error("vine model: wrong edge count in a tree");
            std::vector<BicopSpec> specs;
            for (const auto& e : edges) {
                const auto name = e.at("family").get<std::string>();
                auto fam = family_from_name(name);
                if (!fam) throw std::runtime_error("vine model: unknown family '" + name + "'");
                const auto par = e.at("params").get<std::vector<double>>();
                if (static_cast<int>(par.size()) != parameter_count(*fam))
                    throw std::runtime_error("vine model: wrong parameter count for " + name);
                BicopSpec s{*fam, e.at("rotation").get<int>(), {}};
                for (std::size_t i = 0; i < par.size(); ++i) s.params[i] = par[i];
                validate(s);
                specs.push_back(s);
            }
            m.specs.push_back(specs);
        }
        m.loglik = j.value("loglik", 0.0);
        m.method = method_from(j.value("method", std::string("sequential")));
        m.converged = j.value("converged", true);
        m.warnings = j.value("warnings", std::vector<std::string>{});
        return m;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("vine model: ") + e.what());
    }
}

std::string marginals_to_json(const std::vector<NamedMarginal>& fits) {
    json arr = json::array();
    for (const auto& f : fits) {
        const auto& p = f.fit.params;
        arr.push_back({{"asset", f.asset},
                       {"mu", p.mu},
                       {"phi", p.phi},
                       {"omega", p.omega},
                       {"alpha", p.alpha},
                       {"beta", p.beta},
                       {"skew", p.skewt.skew},
                       {"shape", p.skewt.shape},
                       {"loglik", f.fit.log_likelihood},
                       {"converged", f.fit.converged},
                       {"last_return", f.fit.last_return},
                       {"last_variance", f.fit.last_variance},
                       {"last_innovation", f.fit.last_innovation}});
    }
    json j;
    j["marginals"] = arr;
    return j.dump(2) + "\n";
}

std::vector<NamedMarginal> marginals_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        std::vector<NamedMarginal> out;
        for (const auto& e : j.at("marginals")) {
            NamedMarginal m;
            m.asset = e.at("asset").get<std::string>();
            auto& p = m.fit.params;
            p.mu = e.at("mu").get<double>();
            p.phi = e.at("phi").get<double>();
            p.omega = e.at("omega").get<double>();
            p.alpha = e.at("alpha").get<double>();
            p.beta = e.at("beta").get<double>();
            p.skewt.skew = e.at("skew").get<double>();
            p.skewt.shape = e.at("shape").get<double>();
            validate(p);
            m.fit.log_likelihood = e.value("loglik", 0.0);
            m.fit.converged = e.value("converged", true);
            m.fit.last_return = e.at("last_return").get<double>();
            m.fit.last_variance = e.at("last_variance").get<double>();
            m.fit.last_innovation = e.at("last_innovation").get<double>();
            out.push_back(std::move(m));
        }
        return out;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("marginals file: ") + e.what());
    }
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& m) {
    if (static_cast<Eigen::Index>(header.size()) != m.cols()) throw std::invalid_argument("write_matrix_csv: header size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << csv::escape(header[j]);
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt::format("{:.17g}", m(i, j));
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string rec;
    int line = 0;
    if (!csv::read_record(in, rec, line)) throw std::runtime_error(path + ": empty file");
    const auto head = csv::split(rec);
    std::vector<std::vector<double>> rows;
    while (csv::read_record(in, rec, line)) {
        if (rec.empty()) continue;
        auto cells = csv::split(rec);
        if (cells.size() != head.size()) throw std::runtime_error(fmt::format("{}:{}: wrong field count", path, line));
        std::vector<double> v;
        for (const auto& c : cells) {
            try {
                std::size_t pos = 0;
                v.push_back(std::stod(c, &pos));
                if (pos != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw std::runtime_error(fmt::format("{}:{}: unparseable value '{}'", path, line, c));
            }
        }
        rows.push_back(std::move(v));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(head.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < head.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (header) *header = head;
    return m;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

} // namespace vineport
