// bethe-lab: batch front end for the tree-strip transport laboratory.
//
//   bethe-lab run <config.json>
//   bethe-lab verify --level fast|full [--seed N] [--out report.json]
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure,
// 4 statistical-inconclusive.

#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bethe/errors.hpp"
#include "bethe/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tree-strip random-operator laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
    run->add_option("config", config_path, "path to config.json")->required();

    std::string level = "fast";
    std::string verify_out;
    uint64_t verify_seed = 1;
    auto* verify = app.add_subcommand("verify", "run the exact identity suite");
    verify->add_option("--level", level, "fast|full")
        ->check(CLI::IsMember({"fast", "full"}));
    verify->add_option("--out", verify_out, "JSON report path");
    verify->add_option("--seed", verify_seed, "seed for randomized identity instances");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            std::ifstream is(config_path);
            if (!is) throw bethe::validation_error("cannot open config: " + config_path);
            nlohmann::json j;
            is >> j;
            const auto cfg = bethe::run_config_from_json(j);
            return bethe::run_experiment(cfg, std::cout);
        }
        bethe::RunConfig cfg;
        cfg.model = bethe::validate_params(2, 1, bethe::RMatrix::Zero(1, 1), 0.0, {});
        cfg.experiment = "verify";
        cfg.verify_level = level;
        cfg.seed = verify_seed;
        cfg.seed_set = true;
        cfg.out_json = verify_out;
        return bethe::run_experiment(cfg, std::cout);
    } catch (const bethe::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const bethe::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const bethe::statistical_error& e) {
        std::cerr << "statistical-inconclusive: " << e.what() << "\n";
        return 4;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
