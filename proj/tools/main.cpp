// Command-line front end: `safectrl run` executes a learning experiment and
// writes its artifacts, `safectrl verify` replays the artifacts of a previous
// run and rechecks every certificate claim.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "safectrl/config.hpp"
#include "safectrl/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Safe learning controller synthesis for 1-D systems"};
  app.require_subcommand(1);

  std::string run_config;
  std::string run_out = "artifacts";
  CLI::App* run = app.add_subcommand("run", "Run a learning experiment and write artifacts");
  run->add_option("--config", run_config, "JSON config file (defaults apply when omitted)");
  run->add_option("--out", run_out, "Output directory for artifacts");

  std::string verify_config;
  std::string verify_dir = "artifacts";
  CLI::App* verify =
      app.add_subcommand("verify", "Recheck the certificates recorded in an artifact directory");
  verify->add_option("--config", verify_config,
                     "JSON config file the run used (defaults apply when omitted)");
  verify->add_option("--artifacts", verify_dir, "Artifact directory to verify");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const safectrl::ExperimentConfig cfg =
          run_config.empty() ? safectrl::ExperimentConfig{} : safectrl::load_config(run_config);
      const int rc = safectrl::run_experiment(cfg, run_out);
      std::cout << (rc == 0 ? "run complete, no safety violation\n"
                            : "run complete, SAFETY VIOLATION in rollout\n");
      return rc;
    }
    const safectrl::ExperimentConfig cfg = verify_config.empty()
                                               ? safectrl::ExperimentConfig{}
                                               : safectrl::load_config(verify_config);
    std::string failure;
    const int rc = safectrl::verify_artifacts(cfg, verify_dir, &failure);
    if (rc == 0) {
      std::cout << "artifacts verified\n";
    } else {
      std::cout << "verification FAILED: " << failure << '\n';
    }
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
