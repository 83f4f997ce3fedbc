#include "fregime/model_io.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace fregime::hmm {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
    return rows;
}

Eigen::VectorXd vector_from(const json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index n) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
        throw std::runtime_error("model: matrix has wrong row count");
    }
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd row = vector_from(j.at(static_cast<std::size_t>(i)));
        if (row.size() != n) throw std::runtime_error("model: matrix has wrong column count");
        m.row(i) = row.transpose();
    }
    return m;
}

}  // namespace

ModelDocument to_document(const HmmFit& fit, Eigen::Index n_obs) {
    ModelDocument doc;
    doc.params = fit.params;
    doc.loglik = fit.loglik;
    doc.bic = fit.bic;
    doc.n_free_params = fit.n_free_params;
    doc.n_obs = n_obs;
    doc.seed = fit.seed;
    doc.restarts = fit.n_restarts;
    return doc;
}

void save_model(std::ostream& out, const ModelDocument& doc) {
    const auto& p = doc.params;
    json j;
    j["family"] = to_string(p.family);
    j["K"] = p.n_states();
    j["d"] = p.dim();
    j["pi"] = vector_json(p.pi);
    j["A"] = matrix_json(p.A);
    j["mu"] = json::array();
    j["Sigma"] = json::array();
    for (int k = 0; k < p.n_states(); ++k) {
        j["mu"].push_back(vector_json(p.mu[k]));
        j["Sigma"].push_back(matrix_json(p.sigma[k]));
    }
    j["nu"] = p.family == EmissionFamily::student_t ? vector_json(p.nu) : json::array();
    j["fit"] = {{"loglik", doc.loglik},
                {"bic", doc.bic},
                {"n_free_params", doc.n_free_params},
                {"n_obs", doc.n_obs},
                {"seed", doc.seed},
                {"restarts", doc.restarts}};
    out << j.dump(2) << '\n';
}

ModelDocument load_model(std::istream& in) {
    const json j = json::parse(in);
    ModelDocument doc;
    auto& p = doc.params;
    p.family = family_from_string(j.at("family").get<std::string>());
    const int K = j.at("K").get<int>();
    const int d = j.at("d").get<int>();
    p.pi = vector_from(j.at("pi"));
    p.A = matrix_from(j.at("A"), K);
    for (int k = 0; k < K; ++k) {
        p.mu.push_back(vector_from(j.at("mu").at(static_cast<std::size_t>(k))));
        p.sigma.push_back(matrix_from(j.at("Sigma").at(static_cast<std::size_t>(k)), d));
    }
    p.nu = p.family == EmissionFamily::student_t ? vector_from(j.at("nu")) : Eigen::VectorXd::Constant(K, 0.0);
    p.validate(1e-9);

    const auto& fit = j.at("fit");
    doc.loglik = fit.at("loglik").get<double>();
    doc.bic = fit.at("bic").get<double>();
    doc.n_free_params = fit.at("n_free_params").get<int>();
    doc.n_obs = fit.at("n_obs").get<Eigen::Index>();
    doc.seed = fit.at("seed").get<std::uint64_t>();
    doc.restarts = fit.at("restarts").get<int>();
    return doc;
}

}  // namespace fregime::hmm
