#include "gpr/tools/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "gpr/common/config.hpp"
#include "gpr/common/error.hpp"

#ifndef GPR_VERSION
#define GPR_VERSION "0.0.0"
#endif

namespace gpr::tools {

namespace {

// `--config` files use the project's `key value` line format; keys are long
// option names of the chosen subcommand without the leading dashes.
class KeyValueFormat : public CLI::Config {
 public:
  explicit KeyValueFormat(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::stringstream text;
    text << in.rdbuf();
    // Config is read after the command line, so the subcommand is known.
    std::vector<std::string> parents;
    for (const auto* sub : root_->get_subcommands()) parents = {sub->get_name()};
    std::vector<CLI::ConfigItem> items;
    const auto config = KeyValueConfig::parse(text.str());
    for (const auto& [key, value] : config.entries()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      item.inputs = {value};
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "run seed")->capture_default_str();
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
}

void add_sections(CLI::App* sub, SectionOptions& s) {
  sub->add_option("--rows", s.rows, "section depth cells")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--cols", s.cols, "section lateral cells")->capture_default_str()->check(CLI::Range(2, 1 << 20));
  sub->add_option("--threshold", s.threshold, "back-projection threshold, fraction of the section maximum")
      ->capture_default_str();
  sub->add_option("--permittivity", s.permittivity, "relative permittivity (default: from scene.txt)");
}

void add_migrate(CLI::App* sub, MigrateOptions& o) {
  add_common(sub, o.common);
  sub->add_option("--input", o.input, "simulated scene directory")->required();
  add_sections(sub, o.section);
  sub->add_option("--migration-checkpoint", o.migration_checkpoint, "MigrationNet checkpoint");
  sub->add_option("--migration-width", o.migration_width, "MigrationNet base width")->capture_default_str();
}

void add_eval(CLI::App* sub, EvalOptions& o) {
  add_common(sub, o.common);
  sub->add_option("--data", o.data, "dataset directory (sample_NNNN.{sparse,dense}.ply)")->required();
  sub->add_option("--checkpoint", o.checkpoint, "GPRNet checkpoint");
  sub->add_option("--stub", o.stub, "built-in predictor instead of a checkpoint ('perfect')");
  sub->add_option("--width-divisor", o.width_divisor, "GPRNet hidden-width divisor")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate GPR surveys of buried pipes and reconstruct them as point clouds", "gpr-recon"};
  app.set_version_flag("--version", GPR_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key-value settings file (keys are long option names)");
  app.config_formatter(std::make_shared<KeyValueFormat>(&app));

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "synthesize B-scans and ground truth");
  add_common(simulate, sim.common);
  simulate->add_option("--scene", sim.scene, "scene file (default: built-in demo scene)");
  simulate->add_option("--survey", sim.survey, "survey file (default: grid survey over the slab)");
  simulate->add_option("--line-spacing", sim.line_spacing, "m")->capture_default_str();
  simulate->add_option("--trace-spacing", sim.trace_spacing, "m")->capture_default_str();
  simulate->add_option("--direction", sim.direction, "scan axis, x or y")->capture_default_str();
  simulate->add_option("--samples", sim.samples, "time samples per trace")->capture_default_str();
  simulate->add_option("--dt", sim.dt_ns, "sample interval, ns")->capture_default_str();
  simulate->add_option("--frequency", sim.frequency_ghz, "Ricker center frequency, GHz")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "Gaussian amplitude noise sigma")->capture_default_str();
  simulate->add_option("--count", sim.count, "random scenes to generate (dataset mode)")->capture_default_str();
  simulate->add_option("--rows", sim.rows, "ground-truth section depth cells")->capture_default_str();
  simulate->add_option("--cols", sim.cols, "ground-truth section lateral cells")->capture_default_str();

  MigrateOptions mig;
  auto* migrate = app.add_subcommand("migrate", "B-scans to cross-section masks");
  add_migrate(migrate, mig);

  ReconstructOptions rec;
  auto* reconstruct = app.add_subcommand("reconstruct", "B-scans to sparse and dense point clouds");
  add_migrate(reconstruct, rec.migrate);
  reconstruct->add_flag("--oracle-bpa", rec.oracle_bpa, "threshold back-projection instead of MigrationNet");
  reconstruct->add_option("--gprnet-checkpoint", rec.gprnet_checkpoint, "GPRNet checkpoint");
  reconstruct->add_option("--width-divisor", rec.width_divisor, "GPRNet hidden-width divisor")->capture_default_str();
  reconstruct->add_option("--ground-truth", rec.ground_truth, "dense PLY (default: <input>/truth/dense.ply)");

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "train GPRNet on a dataset, or MigrationNet on random scenes");
  add_common(train, tr.common);
  train->add_option("--network", tr.network, "gprnet or migration")->capture_default_str();
  train->add_option("--data", tr.data, "dataset directory (GPRNet)");
  train->add_option("--init", tr.init, "checkpoint to start from");
  train->add_option("--epochs", tr.epochs)->capture_default_str();
  train->add_option("--batch", tr.batch)->capture_default_str();
  train->add_option("--lr", tr.lr, "initial learning rate")->capture_default_str();
  train->add_option("--decay", tr.decay, "learning-rate decay factor")->capture_default_str();
  train->add_option("--decay-interval", tr.decay_interval, "optimizer steps per decay")->capture_default_str();
  train->add_option("--val", tr.validation, "validation samples")->capture_default_str();
  train->add_option("--test", tr.test, "held-out test samples")->capture_default_str();
  train->add_option("--max-steps", tr.max_steps, "stop after this many steps (0: no limit)")->capture_default_str();
  train->add_option("--width-divisor", tr.width_divisor, "GPRNet hidden-width divisor")->capture_default_str();
  train->add_option("--count", tr.count, "MigrationNet training scenes")->capture_default_str();
  train->add_option("--size", tr.size, "MigrationNet sample side")->capture_default_str();
  train->add_option("--steps", tr.steps, "MigrationNet steps")->capture_default_str();
  train->add_option("--migration-width", tr.migration_width)->capture_default_str();
  train->add_option("--migration-lr", tr.migration_lr)->capture_default_str();
  train->add_option("--target-accuracy", tr.target_accuracy, "MigrationNet early stop")->capture_default_str();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Chamfer and L1 metrics over a dataset");
  add_eval(eval, ev);

  EvalOptions sw;
  auto* sweep = app.add_subcommand("noise-sweep", "metrics with Gaussian noise on the sparse input");
  add_eval(sweep, sw);
  sweep->add_option("--levels", sw.levels, "noise standard deviations, m")->delimiter(',')->capture_default_str();

  ExportOptions ex;
  auto* exporter = app.add_subcommand("export", "simulated scenes to a training dataset");
  add_common(exporter, ex.common);
  exporter->add_option("--input", ex.input, "simulated scene or dataset directory")->required();
  exporter->add_option("--source", ex.source, "gt or bpa")->capture_default_str();
  add_sections(exporter, ex.section);

  for (auto* sub : app.get_subcommands({})) sub->allow_config_extras(CLI::config_extras_mode::error);
  app.allow_config_extras(CLI::config_extras_mode::error);

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) cmd_simulate(sim, out);
    if (migrate->parsed()) cmd_migrate(mig, out);
    if (reconstruct->parsed()) cmd_reconstruct(rec, out);
    if (train->parsed()) cmd_train(tr, out);
    if (eval->parsed()) cmd_eval(ev, out);
    if (sweep->parsed()) cmd_noise_sweep(sw, out);
    if (exporter->parsed()) cmd_export(ex, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace gpr::tools
