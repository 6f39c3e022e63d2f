#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpr::tools {

/// Thrown for argument combinations CLI11 cannot express; exits with 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::filesystem::path out = "gpr-out";
};

struct SectionOptions {
  std::size_t rows = 128;
  std::size_t cols = 128;
  double threshold = 0.5;
  std::optional<double> permittivity;  // overrides scene.txt
};

struct SimulateOptions {
  Common common;
  std::optional<std::filesystem::path> scene, survey;
  double line_spacing = 0.2;
  double trace_spacing = 0.02;
  std::string direction = "x";
  std::size_t samples = 256;
  double dt_ns = 0.1;
  double frequency_ghz = 1.5;
  double noise = 0.0;  // B-scan amplitude sigma
  std::size_t count = 0;
  std::size_t rows = 128, cols = 128;
};

struct MigrateOptions {
  Common common;
  std::filesystem::path input;
  SectionOptions section;
  std::optional<std::filesystem::path> migration_checkpoint;
  std::size_t migration_width = 32;
};

struct ReconstructOptions {
  MigrateOptions migrate;
  bool oracle_bpa = false;
  std::optional<std::filesystem::path> gprnet_checkpoint, ground_truth;
  std::size_t width_divisor = 4;
};

struct TrainOptions {
  Common common;
  std::string network = "gprnet";
  std::optional<std::filesystem::path> data, init;
  std::size_t epochs = 100, batch = 16, validation = 100, test = 150, max_steps = 0, width_divisor = 4;
  double lr = 5e-5, decay = 0.7;
  std::uint64_t decay_interval = 50000;
  // MigrationNet
  std::size_t count = 32, size = 64, steps = 2000, migration_width = 32;
  double migration_lr = 1e-3, target_accuracy = 0.0;
};

struct EvalOptions {
  Common common;
  std::filesystem::path data;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> stub;
  std::size_t width_divisor = 4;
  std::vector<double> levels{0.05, 0.1, 0.2, 0.5};
};

struct ExportOptions {
  Common common;
  std::filesystem::path input;
  std::string source = "gt";
  SectionOptions section;
};

void cmd_simulate(const SimulateOptions& o, std::ostream& log);
void cmd_migrate(const MigrateOptions& o, std::ostream& log);
void cmd_reconstruct(const ReconstructOptions& o, std::ostream& log);
void cmd_train(const TrainOptions& o, std::ostream& log);
void cmd_eval(const EvalOptions& o, std::ostream& log);
void cmd_noise_sweep(const EvalOptions& o, std::ostream& log);
void cmd_export(const ExportOptions& o, std::ostream& log);

}  // namespace gpr::tools
