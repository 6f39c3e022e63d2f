#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "gpr/autodiff/checkpoint.hpp"
#include "gpr/autodiff/layers.hpp"
#include "gpr/cloud/metrics.hpp"
#include "gpr/cloud/ply.hpp"
#include "gpr/cloud/registration.hpp"
#include "gpr/common/error.hpp"
#include "gpr/common/random.hpp"
#include "gpr/gprnet/dataset.hpp"
#include "gpr/gprnet/model.hpp"
#include "gpr/gprnet/train.hpp"
#include "gpr/migration/backproject.hpp"
#include "gpr/migration/migrationnet.hpp"
#include "gpr/scene/forward.hpp"
#include "json.hpp"
#include "manifest.hpp"

namespace gpr::tools {

namespace fs = std::filesystem;

namespace {

// Shortest round-trip decimal.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string indexed(const std::string& stem, std::size_t i, int width, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return stem + "_" + buf + ext;
}

void record_common(Manifest& m, const Common& c) {
  m.settings().set("seed", std::to_string(c.seed));
}

survey::ScanAxis parse_axis(const std::string& s) {
  if (s == "x" || s == "X") return survey::ScanAxis::X;
  if (s == "y" || s == "Y") return survey::ScanAxis::Y;
  throw UsageError("--direction must be x or y, got '" + s + "'");
}

// One simulated scene on disk:
//   scene.txt  survey.txt  bscans/line_NN.gprb  truth/section_NN.gprc  truth/dense.ply
struct Bundle {
  fs::path dir;
  std::optional<scene::PipeScene> scene;
  survey::SurveyPlan plan;
  std::vector<scene::BScan> bscans;
};

void write_bundle(const scene::PipeScene& scene, const survey::SurveyPlan& plan, const SimulateOptions& o,
                  std::uint64_t seed, const fs::path& dir, Manifest& m) {
  fs::create_directories(dir / "bscans");
  fs::create_directories(dir / "truth");
  scene::save_scene(scene, dir / "scene.txt");
  m.output(dir / "scene.txt");
  survey::save_survey(plan, dir / "survey.txt");
  m.output(dir / "survey.txt");

  scene::ForwardConfig fwd;
  fwd.samples = o.samples;
  fwd.dt_ns = o.dt_ns;
  fwd.center_frequency_ghz = o.frequency_ghz;
  const auto bscans = scene::synthesize_survey(scene, plan, fwd);
  const int width = plan.lines.size() > 99 ? 3 : 2;
  for (std::size_t i = 0; i < bscans.size(); ++i) {
    const auto path = dir / "bscans" / indexed("line", i, width, ".gprb");
    scene::save_bscan(o.noise > 0.0 ? scene::add_gaussian_noise(bscans[i], o.noise, split_seed(seed, 100 + i))
                                    : bscans[i],
                      path);
    m.output(path);
    const auto truth = scene::ground_truth_cross_section(scene, scene::section_for_line(plan.lines[i], o.rows, o.cols));
    const auto tpath = dir / "truth" / indexed("section", i, width, ".gprc");
    scene::save_cross_section(truth, tpath);
    m.output(tpath);
  }
  cloud::save_ply(scene::ground_truth_dense_cloud(scene, scene::kDenseCloudSize, split_seed(seed, 2)),
                  dir / "truth" / "dense.ply");
  m.output(dir / "truth" / "dense.ply");
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& ext) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

Bundle load_bundle(const fs::path& dir, bool need_bscans) {
  if (!fs::is_regular_file(dir / "survey.txt")) throw DataError(dir.string() + " has no survey.txt");
  Bundle b;
  b.dir = dir;
  b.plan = survey::load_survey(dir / "survey.txt");
  if (fs::is_regular_file(dir / "scene.txt")) b.scene = scene::load_scene(dir / "scene.txt");
  if (!need_bscans) return b;
  for (const auto& p : sorted_files(dir / "bscans", ".gprb")) b.bscans.push_back(scene::load_bscan(p));
  if (b.bscans.size() != b.plan.lines.size()) {
    throw DataError(dir.string() + ": " + std::to_string(b.bscans.size()) + " B-scans for " +
                    std::to_string(b.plan.lines.size()) + " survey lines");
  }
  // Poses must follow their survey line from start to end.
  for (std::size_t i = 0; i < b.bscans.size(); ++i) {
    const auto& line = b.plan.lines[i];
    const auto& poses = b.bscans[i].poses;
    const double tol = 0.5 * line.trace_spacing;
    if (norm(poses.front().position - line.start) > tol || norm(poses.back().position - line.end) > tol) {
      throw DataError(dir.string() + ": B-scan " + std::to_string(i) + " poses do not follow survey line " +
                      std::to_string(i));
    }
  }
  return b;
}

// A single bundle, or the scene_NNNN bundles of a dataset directory.
std::vector<fs::path> bundle_dirs(const fs::path& input) {
  if (fs::is_regular_file(input / "survey.txt")) return {input};
  std::vector<fs::path> out;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.is_directory() && e.path().filename().string().rfind("scene_", 0) == 0) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError(input.string() + " holds no simulated scenes");
  return out;
}

// Seed a bundle was simulated with; export reuses it so its samples match
// the in-memory dataset generator.
std::uint64_t bundle_seed(std::uint64_t seed, std::size_t index, bool single) {
  return single ? seed : split_seed(split_seed(seed, index), 0);
}

double permittivity_of(const Bundle& b, const SectionOptions& s) {
  if (s.permittivity) return *s.permittivity;
  if (b.scene) return b.scene->permittivity;
  throw UsageError(b.dir.string() + " has no scene.txt; pass --permittivity");
}

struct Migrated {
  std::vector<scene::GridFile> images;  // f32 back-projection or probabilities
  std::vector<scene::CrossSection> sections;
};

Migrated migrate_bundle(const Bundle& b, const MigrateOptions& o, std::ostream& log) {
  const double eps = permittivity_of(b, o.section);
  std::optional<migration::MigrationNetModel> net;
  if (o.migration_checkpoint) {
    net.emplace(migration::MigrationNetConfig{o.migration_width, 0});
    ad::assign_parameters(net->parameters(), ad::load_checkpoint(*o.migration_checkpoint));
  }
  Migrated out;
  for (std::size_t i = 0; i < b.bscans.size(); ++i) {
    const auto geom = scene::section_for_line(b.plan.lines[i], o.section.rows, o.section.cols);
    scene::GridFile grid;
    grid.geometry = geom;
    grid.dtype = scene::GridFile::Dtype::F32;
    if (net) {
      const auto probs =
          migration::migrationnet_forward(*net, migration::resample_to_section(b.bscans[i], geom, eps));
      grid.f32.assign(probs.begin(), probs.end());
      out.sections.push_back(migration::probabilities_to_cross_section(probs, geom));
    } else {
      const auto image = migration::backproject(b.bscans[i], geom, eps);
      grid.f32.assign(image.values.begin(), image.values.end());
      out.sections.push_back(migration::threshold_to_cross_section(image, o.section.threshold));
    }
    out.images.push_back(std::move(grid));
  }
  std::size_t hits = 0;
  for (const auto& s : out.sections) hits += s.occupied();
  log << "migrated " << b.bscans.size() << " B-scans (" << (net ? "MigrationNet" : "back-projection") << "), "
      << hits << " occupied cells\n";
  return out;
}

void record_sections(Manifest& m, const MigrateOptions& o) {
  m.input(o.input);
  m.settings().set("rows", std::to_string(o.section.rows));
  m.settings().set("cols", std::to_string(o.section.cols));
  m.settings().set("threshold", num(o.section.threshold));
  if (o.section.permittivity) m.settings().set("permittivity", num(*o.section.permittivity));
  if (o.migration_checkpoint) {
    m.input(*o.migration_checkpoint);
    m.settings().set("migration-checkpoint", o.migration_checkpoint->generic_string());
    m.settings().set("migration-width", std::to_string(o.migration_width));
  }
}

gprnet::GprNetModel load_gprnet(const std::optional<fs::path>& checkpoint, std::size_t divisor, std::uint64_t seed) {
  gprnet::GprNetModel model({divisor, 0.01, seed});
  if (checkpoint) ad::assign_parameters(model.parameters(), ad::load_checkpoint(*checkpoint));
  return model;
}

void write_text(const fs::path& path, const std::string& text, Manifest& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  m.output(path);
}

}  // namespace

void cmd_simulate(const SimulateOptions& o, std::ostream& log) {
  Manifest m("simulate", o.common.out);
  record_common(m, o.common);
  const auto axis = parse_axis(o.direction);
  for (auto [k, v] : {std::pair{"line-spacing", o.line_spacing}, std::pair{"trace-spacing", o.trace_spacing},
                      std::pair{"dt", o.dt_ns}, std::pair{"frequency", o.frequency_ghz}, std::pair{"noise", o.noise}})
    m.settings().set(k, num(v));
  m.settings().set("direction", o.direction);
  m.settings().set("samples", std::to_string(o.samples));
  m.settings().set("count", std::to_string(o.count));
  m.settings().set("rows", std::to_string(o.rows));
  m.settings().set("cols", std::to_string(o.cols));
  if (o.noise < 0.0) throw UsageError("--noise must be >= 0");
  fs::create_directories(o.common.out);

  auto plan_for = [&](const scene::PipeScene& s) {
    if (o.survey) return survey::load_survey(*o.survey);
    auto plan = survey::plan_grid_survey(s.slab, o.line_spacing, o.trace_spacing, axis);
    if (plan.warning) log << "warning: " << *plan.warning << "\n";
    return plan;
  };

  m.start("simulate");
  if (o.count == 0) {
    scene::PipeScene s = scene::demo_scene();
    if (o.scene) {
      s = scene::load_scene(*o.scene);
      m.input(*o.scene);
    }
    if (o.survey) m.input(*o.survey);
    const auto plan = plan_for(s);
    write_bundle(s, plan, o, bundle_seed(o.common.seed, 0, true), o.common.out, m);
    log << "simulated " << plan.lines.size() << " scan lines over " << s.pipes.size() << " pipes\n";
  } else {
    if (o.scene) throw UsageError("--scene and --count are exclusive");
    // Same scene streams as the in-memory dataset generator: scenes whose
    // survey sees nothing are redrawn.
    gprnet::SurveyConfig probe;
    probe.line_spacing = o.line_spacing;
    probe.trace_spacing = o.trace_spacing;
    probe.direction = axis;
    probe.section_rows = o.rows;
    probe.section_cols = o.cols;
    for (std::size_t i = 0; i < o.count; ++i) {
      const std::uint64_t child = split_seed(o.common.seed, i);
      for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng = make_rng(child, attempt);
        const auto s = scene::random_scene(rng);
        const auto plan = plan_for(s);
        try {
          (void)gprnet::sparse_cloud_from_ground_truth(s, plan, probe);
        } catch (const DataError&) {
          if (attempt >= 16) throw;
          continue;
        }
        write_bundle(s, plan, o, split_seed(child, attempt), o.common.out / indexed("scene", i, 4, ""), m);
        break;
      }
    }
    log << "simulated " << o.count << " scenes\n";
  }
  m.stop("simulate");
  m.write();
}

void cmd_migrate(const MigrateOptions& o, std::ostream& log) {
  Manifest m("migrate", o.common.out);
  record_common(m, o.common);
  record_sections(m, o);
  const Bundle b = load_bundle(o.input, true);
  fs::create_directories(o.common.out / "migrated");
  fs::create_directories(o.common.out / "sections");
  m.start("migrate");
  const auto result = migrate_bundle(b, o, log);
  m.stop("migrate");
  const int width = b.bscans.size() > 99 ? 3 : 2;
  for (std::size_t i = 0; i < result.sections.size(); ++i) {
    const auto ipath = o.common.out / "migrated" / indexed("line", i, width, ".gprc");
    scene::save_grid(result.images[i], ipath);
    m.output(ipath);
    const auto spath = o.common.out / "sections" / indexed("line", i, width, ".gprc");
    scene::save_cross_section(result.sections[i], spath);
    m.output(spath);
  }
  m.write();
}

void cmd_reconstruct(const ReconstructOptions& o, std::ostream& log) {
  if (o.oracle_bpa == o.migrate.migration_checkpoint.has_value()) {
    throw UsageError(o.oracle_bpa ? "--oracle-bpa and --migration-checkpoint are exclusive"
                                  : "reconstruct needs --migration-checkpoint or --oracle-bpa");
  }
  const auto& out = o.migrate.common.out;
  Manifest m("reconstruct", out);
  record_common(m, o.migrate.common);
  record_sections(m, o.migrate);
  m.settings().set("oracle-bpa", o.oracle_bpa ? "true" : "false");
  m.settings().set("width-divisor", std::to_string(o.width_divisor));
  if (o.gprnet_checkpoint) {
    m.input(*o.gprnet_checkpoint);
    m.settings().set("gprnet-checkpoint", o.gprnet_checkpoint->generic_string());
  } else {
    log << "warning: no --gprnet-checkpoint; completing with an untrained network seeded by --seed\n";
  }
  const Bundle b = load_bundle(o.migrate.input, true);
  fs::create_directories(out);

  m.start("migrate");
  const auto migrated = migrate_bundle(b, o.migrate, log);
  m.stop("migrate");

  m.start("register");
  const auto registered = cloud::register_cross_sections(migrated.sections);
  const auto sparse = cloud::resample(registered, cloud::kSparseCloudSize, split_seed(o.migrate.common.seed, 1));
  m.stop("register");
  cloud::save_ply(registered, out / "registered.ply");
  m.output(out / "registered.ply");
  cloud::save_ply(sparse, out / "sparse.ply");
  m.output(out / "sparse.ply");

  m.start("complete");
  const auto model = load_gprnet(o.gprnet_checkpoint, o.width_divisor, split_seed(o.migrate.common.seed, 3));
  const auto dense = model.complete(sparse);
  m.stop("complete");
  cloud::save_ply(dense, out / "dense.ply");
  m.output(out / "dense.ply");
  log << "registered " << registered.size() << " points, completed to " << dense.size() << "\n";

  std::optional<fs::path> truth = o.ground_truth;
  if (!truth && fs::is_regular_file(b.dir / "truth" / "dense.ply")) truth = b.dir / "truth" / "dense.ply";
  if (truth) {
    m.input(*truth);
    const auto gt = cloud::load_ply(*truth);
    nlohmann::ordered_json j;
    j["cd_x1e3"] = 1e3 * cloud::chamfer_distance(dense, gt).value;
    j["l1_x100"] = 1e2 * cloud::l1_nn_distance(dense, gt);
    j["sparse_cd_x1e3"] = 1e3 * cloud::chamfer_distance(sparse, gt).value;
    j["sparse_l1_x100"] = 1e2 * cloud::l1_nn_distance(sparse, gt);
    j["registered_points"] = registered.size();
    j["dense_points"] = dense.size();
    write_text(out / "metrics.json", j.dump(2) + "\n", m);
    log << "dense CD x1e3 " << j["cd_x1e3"].get<double>() << ", L1 x100 " << j["l1_x100"].get<double>() << "\n";
  }
  m.write();
}

void cmd_train(const TrainOptions& o, std::ostream& log) {
  const auto& out = o.common.out;
  Manifest m("train", out);
  record_common(m, o.common);
  m.settings().set("network", o.network);
  fs::create_directories(out);

  if (o.network == "migration") {
    for (auto [k, v] : {std::pair{"count", o.count}, std::pair{"size", o.size}, std::pair{"steps", o.steps},
                        std::pair{"migration-width", o.migration_width}})
      m.settings().set(k, std::to_string(v));
    m.settings().set("migration-lr", num(o.migration_lr));
    m.settings().set("target-accuracy", num(o.target_accuracy));
    if (o.size == 0 || o.size % migration::kMigrationPooling != 0) throw UsageError("--size must be a multiple of 8");
    // Random scenes, each seen along a line across its middle.
    std::vector<migration::MigrationSample> data;
    for (std::size_t i = 0; i < o.count; ++i) {
      Rng rng = make_rng(o.common.seed, 10 + i);
      const auto s = scene::random_scene(rng);
      const double cell = s.slab.x / static_cast<double>(o.size);
      data.push_back(migration::make_migration_sample(s, {0.0, 0.5 * s.slab.y, 0.0}, survey::ScanAxis::X, o.size, cell));
    }
    migration::MigrationNetModel model({o.migration_width, split_seed(o.common.seed, 3)});
    if (o.init) {
      m.input(*o.init);
      ad::assign_parameters(model.parameters(), ad::load_checkpoint(*o.init));
    }
    migration::MigrationTrainConfig cfg;
    cfg.steps = o.steps;
    cfg.learning_rate = o.migration_lr;
    cfg.seed = o.common.seed;
    cfg.target_accuracy = o.target_accuracy;
    cfg.checkpoint = out / "migrationnet.gprn";
    m.start("train");
    const auto result = migration::train_migrationnet(model, data, cfg);
    m.stop("train");
    ad::save_checkpoint(model.parameters(), out / "migrationnet.gprn");
    m.output(out / "migrationnet.gprn");
    std::string csv = "step,loss\n";
    for (std::size_t i = 0; i < result.step_loss.size(); ++i) csv += std::to_string(i + 1) + "," + num(result.step_loss[i]) + "\n";
    write_text(out / "loss.csv", csv, m);
    log << "MigrationNet: " << result.steps_run << " steps, pixel accuracy " << result.final_accuracy << "\n";
    m.write();
    return;
  }
  if (o.network != "gprnet") throw UsageError("--network must be gprnet or migration");
  if (!o.data) throw UsageError("train needs --data");

  gprnet::TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.decay_factor = o.decay;
  cfg.decay_interval = o.decay_interval;
  cfg.seed = o.common.seed;
  cfg.validation_count = o.validation;
  cfg.test_count = o.test;
  cfg.max_steps = o.max_steps;
  for (auto [k, v] : {std::pair{"epochs", o.epochs}, std::pair{"batch", o.batch}, std::pair{"val", o.validation},
                      std::pair{"test", o.test}, std::pair{"max-steps", o.max_steps},
                      std::pair{"width-divisor", o.width_divisor}})
    m.settings().set(k, std::to_string(v));
  m.settings().set("lr", num(o.lr));
  m.settings().set("decay", num(o.decay));
  m.settings().set("decay-interval", std::to_string(o.decay_interval));
  m.input(*o.data);
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const auto data = gprnet::load_dataset(*o.data);
  if (o.validation + o.test >= data.size()) {
    throw UsageError("--val " + std::to_string(o.validation) + " + --test " + std::to_string(o.test) +
                     " leaves no training samples out of " + std::to_string(data.size()));
  }
  const auto split = gprnet::split_dataset(data.size(), o.validation, o.test, split_seed(o.common.seed, 4));
  auto pick = [&](const std::vector<std::size_t>& idx) {
    std::vector<gprnet::Sample> s;
    for (auto i : idx) s.push_back(data[i]);
    return s;
  };
  nlohmann::ordered_json sj;
  sj["train"] = split.train;
  sj["validation"] = split.validation;
  sj["test"] = split.test;
  write_text(out / "split.json", sj.dump() + "\n", m);

  auto model = load_gprnet(o.init, o.width_divisor, split_seed(o.common.seed, 3));
  if (o.init) m.input(*o.init);
  const gprnet::TrainOutputs files{out / "metrics.csv", out / "best.gprn"};
  m.start("train");
  const auto report = gprnet::train_gprnet(model, pick(split.train), pick(split.validation), cfg, files);
  m.stop("train");
  m.output(out / "metrics.csv");
  m.output(out / "best.gprn");
  ad::save_checkpoint(model.parameters(), out / "last.gprn");
  m.output(out / "last.gprn");
  log << "trained " << report.epochs.size() << " epochs, " << report.step_loss.size() << " steps; best val CD "
      << report.best_val_cd << " at epoch " << report.best_epoch << "\n";
  m.write();
}

namespace {

gprnet::Predictor predictor_for(const EvalOptions& o, Manifest& m, std::optional<gprnet::GprNetModel>& holder) {
  if (o.stub && o.checkpoint) throw UsageError("--stub and --checkpoint are exclusive");
  if (o.stub) {
    if (*o.stub != "perfect") throw UsageError("unknown stub '" + *o.stub + "' (only 'perfect')");
    m.settings().set("stub", *o.stub);
    return gprnet::perfect_stub();
  }
  if (!o.checkpoint) throw UsageError("needs --checkpoint or --stub perfect");
  m.input(*o.checkpoint);
  m.settings().set("checkpoint", o.checkpoint->generic_string());
  m.settings().set("width-divisor", std::to_string(o.width_divisor));
  holder.emplace(load_gprnet(o.checkpoint, o.width_divisor, 0));
  const auto* model = &*holder;
  return [model](const gprnet::Sample& s) { return model->complete(s.sparse); };
}

}  // namespace

void cmd_eval(const EvalOptions& o, std::ostream& log) {
  Manifest m("eval", o.common.out);
  record_common(m, o.common);
  m.input(o.data);
  std::optional<gprnet::GprNetModel> holder;
  const auto predict = predictor_for(o, m, holder);
  const auto data = gprnet::load_dataset(o.data);
  fs::create_directories(o.common.out);
  m.start("eval");
  const auto report = gprnet::evaluate(predict, data);
  m.stop("eval");
  std::string csv = "sample,cd_x1e3,l1_x100\n";
  for (std::size_t i = 0; i < report.samples.size(); ++i)
    csv += std::to_string(i) + "," + num(1e3 * report.samples[i].cd) + "," + num(1e2 * report.samples[i].l1) + "\n";
  write_text(o.common.out / "eval.csv", csv, m);
  nlohmann::ordered_json j;
  j["samples"] = report.samples.size();
  j["cd_x1e3"] = report.cd_x1e3;
  j["l1_x100"] = report.l1_x100;
  write_text(o.common.out / "eval.json", j.dump(2) + "\n", m);
  log << "CD x1e3 " << report.cd_x1e3 << ", L1 x100 " << report.l1_x100 << " over " << data.size() << " samples\n";
  m.write();
}

void cmd_noise_sweep(const EvalOptions& o, std::ostream& log) {
  Manifest m("noise-sweep", o.common.out);
  record_common(m, o.common);
  m.input(o.data);
  std::string levels;
  for (double l : o.levels) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw UsageError("noise levels must be finite and >= 0");
    levels += (levels.empty() ? "" : ",") + num(l);
  }
  if (o.levels.empty()) throw UsageError("--levels is empty");
  m.settings().set("levels", levels);
  std::optional<gprnet::GprNetModel> holder;
  const auto predict = predictor_for(o, m, holder);
  const auto data = gprnet::load_dataset(o.data);
  fs::create_directories(o.common.out);

  std::string csv = "sigma,cd_x1e3,l1_x100\n";
  m.start("sweep");
  for (double sigma : o.levels) {
    // Sample i draws the same normal variates at every level.
    auto noisy = data;
    for (std::size_t i = 0; i < noisy.size(); ++i)
      noisy[i].sparse = scene::add_gaussian_noise(data[i].sparse, sigma, split_seed(o.common.seed, i));
    const auto r = gprnet::evaluate(predict, noisy);
    csv += num(sigma) + "," + num(r.cd_x1e3) + "," + num(r.l1_x100) + "\n";
    log << "sigma " << sigma << ": CD x1e3 " << r.cd_x1e3 << ", L1 x100 " << r.l1_x100 << "\n";
  }
  m.stop("sweep");
  write_text(o.common.out / "noise_sweep.csv", csv, m);
  m.write();
}

void cmd_export(const ExportOptions& o, std::ostream& log) {
  Manifest m("export", o.common.out);
  record_common(m, o.common);
  m.input(o.input);
  m.settings().set("source", o.source);
  if (o.source != "gt" && o.source != "bpa") throw UsageError("--source must be gt or bpa");
  const auto dirs = bundle_dirs(o.input);
  const bool single = dirs.size() == 1 && dirs.front() == o.input;

  std::vector<gprnet::Sample> samples;
  m.start("export");
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const Bundle b = load_bundle(dirs[i], o.source == "bpa");
    std::vector<scene::CrossSection> sections;
    if (o.source == "gt") {
      for (const auto& p : sorted_files(dirs[i] / "truth", ".gprc")) sections.push_back(scene::load_cross_section(p));
    } else {
      MigrateOptions mo;
      mo.input = dirs[i];
      mo.section = o.section;
      sections = migrate_bundle(b, mo, log).sections;
    }
    const std::uint64_t seed = bundle_seed(o.common.seed, i, single);
    samples.push_back({cloud::resample(cloud::register_cross_sections(sections), cloud::kSparseCloudSize,
                                       split_seed(seed, 1)),
                       cloud::load_ply(dirs[i] / "truth" / "dense.ply")});
  }
  m.stop("export");
  gprnet::save_dataset(samples, o.common.out);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    m.output(o.common.out / indexed("sample", i, 4, ".sparse.ply"));
    m.output(o.common.out / indexed("sample", i, 4, ".dense.ply"));
  }
  log << "exported " << samples.size() << " samples\n";
  m.write();
}

}  // namespace gpr::tools
