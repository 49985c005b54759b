#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bethe/identities.hpp"
#include "bethe/model.hpp"
#include "bethe/transport.hpp"

#include "json.hpp"

namespace bethe {

// ModelParams <-> JSON with keys {K, m, A (row-major), lambda,
// disorder:{variant, sigma}}
nlohmann::json model_params_to_json(const ModelParams& p);
ModelParams model_params_from_json(const nlohmann::json& j);

// Green's block as {re: m x m, im: m x m}
nlohmann::json green_to_json(const CMatrix& G);
CMatrix green_from_json(const nlohmann::json& j);

struct RunConfig {
    ModelParams model;
    std::string experiment;          // interval | green | transport | indicator |
                                     // wavepacket | plancherel | ward | verify
    std::vector<double> E_list;
    std::vector<double> eta_list;
    std::vector<double> t_list;
    int r_max = 1;
    int r_top = 3;                   // ward chain length
    int depth = 0;                   // <= 0 selects the default depth formula
    int ball_ell = 3;                // ball radius for dense experiments
    std::size_t n_samples = 2;
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string verify_level = "fast";
    std::string out_csv;
    std::string out_json;
};

RunConfig run_config_from_json(const nlohmann::json& j);

// CSV with the fixed header E,eta,lambda,r_max,J,J_stderr,indicator;
// doubles printed with round-trip precision so identical runs are
// byte-identical
std::string transport_csv(const std::vector<TransportRow>& rows);

nlohmann::json ward_report_to_json(const WardReport& rep, const ModelParams& p,
                                   ComplexEnergy z);
nlohmann::json plancherel_report_to_json(const PlancherelReport& pr,
                                         const UpperBoundReport& ub);
nlohmann::json identity_results_to_json(const std::vector<IdentityResult>& results);

// Dispatches one experiment; writes artifacts, prints summary lines to out.
// Returns the process exit code (0 ok, 4 statistical-inconclusive; throws
// validation_error / numerical_error for the 2 / 3 paths).
int run_experiment(const RunConfig& cfg, std::ostream& out);

}  // namespace bethe
