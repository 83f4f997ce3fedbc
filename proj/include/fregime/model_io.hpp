#pragma once

#include <iosfwd>

#include "fregime/hmm.hpp"

namespace fregime::hmm {

/// Persisted model: parameters plus fit metadata. Posteriors and labels are
/// not stored; they are recomputed with `decode`.
struct ModelDocument {
    HmmParams params;
    double loglik = 0.0;
    double bic = 0.0;
    int n_free_params = 0;
    Eigen::Index n_obs = 0;
    std::uint64_t seed = 0;
    int restarts = 0;
};

ModelDocument to_document(const HmmFit& fit, Eigen::Index n_obs);

/// JSON document; doubles are written in shortest round-trip form so
/// save -> load is bit-exact.
void save_model(std::ostream& out, const ModelDocument& doc);
ModelDocument load_model(std::istream& in);

}  // namespace fregime::hmm
