#include "uncseg/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "uncseg/archive.hpp"
#include "uncseg/dataset.hpp"
#include "uncseg/distort.hpp"
#include "uncseg/errors.hpp"
#include "uncseg/metrics.hpp"
#include "uncseg/phantom.hpp"
#include "uncseg/qc.hpp"
#include "uncseg/sampling.hpp"
#include "uncseg/svg.hpp"
#include "uncseg/uncertainty.hpp"

namespace fs = std::filesystem;

namespace uncseg {

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kStructures[3] = {"lv", "myo", "rv"};

PhantomConfig phantom_config_from(const RunConfig& cfg) {
  PhantomConfig p;
  p.image_size = cfg.get_int("image_size", p.image_size);
  p.subjects = cfg.get_int("subjects", p.subjects);
  p.slices_per_subject =
      cfg.get_int("slices_per_subject", p.slices_per_subject);
  p.train_subjects = cfg.get_int("train_subjects", p.train_subjects);
  p.val_subjects = cfg.get_int("val_subjects", p.val_subjects);
  p.test_subjects = cfg.get_int("test_subjects", p.test_subjects);
  p.spacing_mm = float(cfg.get_double("spacing_mm", p.spacing_mm));
  p.contrast_shift =
      float(cfg.get_double("contrast_shift", p.contrast_shift));
  p.seed = cfg.get_u64("phantom_seed", p.seed);
  p.lv_radius_lo = float(cfg.get_double("lv_radius_lo", p.lv_radius_lo));
  p.lv_radius_hi = float(cfg.get_double("lv_radius_hi", p.lv_radius_hi));
  p.myo_thickness_lo =
      float(cfg.get_double("myo_thickness_lo", p.myo_thickness_lo));
  p.myo_thickness_hi =
      float(cfg.get_double("myo_thickness_hi", p.myo_thickness_hi));
  p.noise_sigma = float(cfg.get_double("phantom_noise_sigma", p.noise_sigma));
  return p;
}

// One RunConfig file serves every command, so "unknown key" means unknown to
// the whole schema: touch every recognized key, then reject leftovers.
void check_config_keys(const RunConfig& cfg) {
  phantom_config_from(cfg);
  model_config_from(cfg, "plain");
  train_config_from(cfg);
  cfg.get_u64("distort_seed", 0);
  cfg.get_u64("eval_seed", 0);
  cfg.get_int("eval_jobs", 1);
  cfg.get_double("qc_threshold_lv", 0);
  cfg.get_double("qc_threshold_myo", 0);
  cfg.get_double("qc_threshold_rv", 0);
  cfg.get_double("qc_target", 0.05);
  cfg.require_all_consumed();
}

// Existing-output guard: a marker file the command is known to produce.
void claim_output_dir(const std::string& dir, const std::string& marker,
                      bool force) {
  const fs::path m = fs::path(dir) / marker;
  if (fs::exists(m) && !force)
    throw IoError("output " + m.string() + " exists (use --force)");
  fs::create_directories(dir);
}

}  // namespace

ModelConfig model_config_from(const RunConfig& cfg,
                              const std::string& variant) {
  ModelConfig m;
  // `ensemble` trains plain members; member structure comes from TrainConfig.
  m.variant = variant == "ensemble"
                  ? ModelConfig::kPlain
                  : ModelConfig::variant_from_string(variant);
  m.depth = cfg.get_int("depth", m.depth);
  m.base_filters = cfg.get_int("base_filters", m.base_filters);
  m.num_classes = cfg.get_int("num_classes", m.num_classes);
  m.input_h = cfg.get_int("image_size", m.input_h);
  m.input_w = m.input_h;
  const int crop = cfg.get_int("crop", 0);
  if (crop > 0) {
    m.input_h = crop;
    m.input_w = crop;
  }
  m.prior.mu_prior = float(cfg.get_double("prior_mu", m.prior.mu_prior));
  m.prior.sigma_prior = float(cfg.get_double("prior_sigma", m.prior.sigma_prior));
  m.dropout.rate = float(cfg.get_double("dropout_rate", m.dropout.rate));
  const std::string placement =
      cfg.get_string("dropout_placement", "middle");
  if (placement == "middle")
    m.dropout.placement = DropoutConfig::kMiddleLayers;
  else if (placement == "all")
    m.dropout.placement = DropoutConfig::kAllLayers;
  else
    throw SchemaError("dropout_placement must be middle|all, got '" +
                      placement + "'");
  m.validate();
  return m;
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig t;
  t.lambda = cfg.get_double("lambda", t.lambda);
  t.epochs = cfg.get_int("epochs", t.epochs);
  t.lr_initial = cfg.get_double("lr_initial", t.lr_initial);
  t.lr_after = cfg.get_double("lr_after", t.lr_after);
  t.lr_switch_epoch = cfg.get_int("lr_switch_epoch", t.lr_switch_epoch);
  t.batch_size = cfg.get_int("batch_size", t.batch_size);
  t.seed = cfg.get_u64("train_seed", t.seed);
  t.val_samples = cfg.get_int("val_samples", t.val_samples);
  t.aug_rotate_deg = cfg.get_double("aug_rotate_deg", t.aug_rotate_deg);
  t.aug_translate_px = cfg.get_double("aug_translate_px", t.aug_translate_px);
  t.aug_scale_lo = cfg.get_double("aug_scale_lo", t.aug_scale_lo);
  t.aug_scale_hi = cfg.get_double("aug_scale_hi", t.aug_scale_hi);
  const std::string norm = cfg.get_string("norm_mode", "variance");
  if (norm == "variance")
    t.norm_mode = TrainConfig::kVariance;
  else if (norm == "stddev")
    t.norm_mode = TrainConfig::kStddev;
  else
    throw SchemaError("norm_mode must be variance|stddev, got '" + norm +
                      "'");
  t.crop = cfg.get_int("crop", t.crop);
  t.ensemble_members = cfg.get_int("ensemble_members", t.ensemble_members);
  t.validate();
  return t;
}

void save_checkpoint(const std::string& dir, const UNet& model,
                     const DatasetStats& stats, const TrainConfig& train_cfg,
                     int best_epoch, bool force) {
  TensorArchive a = TensorArchive::create(dir, force);
  const ModelConfig& m = model.config();
  std::map<std::string, std::string> attrs;
  attrs["variant"] = ModelConfig::variant_to_string(m.variant);
  attrs["depth"] = std::to_string(m.depth);
  attrs["base_filters"] = std::to_string(m.base_filters);
  attrs["num_classes"] = std::to_string(m.num_classes);
  attrs["input_h"] = std::to_string(m.input_h);
  attrs["input_w"] = std::to_string(m.input_w);
  attrs["prior_mu"] = fmt17(m.prior.mu_prior);
  attrs["prior_sigma"] = fmt17(m.prior.sigma_prior);
  attrs["dropout_rate"] = fmt17(m.dropout.rate);
  attrs["dropout_placement"] =
      m.dropout.placement == DropoutConfig::kMiddleLayers ? "middle" : "all";
  attrs["norm_mean"] = fmt17(stats.mean);
  attrs["norm_variance"] = fmt17(stats.variance);
  attrs["norm_mode"] =
      train_cfg.norm_mode == TrainConfig::kVariance ? "variance" : "stddev";
  attrs["crop"] = std::to_string(train_cfg.crop);
  attrs["best_epoch"] = std::to_string(best_epoch);
  a.add_f32("meta", {1}, {0.f}, attrs);
  for (const auto& [name, data] : model.snapshot_parameters())
    a.add_f32(name, {int(data.size())}, data);
}

Checkpoint load_checkpoint(const std::string& dir) {
  TensorArchive a = TensorArchive::open(dir);
  if (!a.contains("meta"))
    throw SchemaError("checkpoint " + dir + ": missing meta entry");
  const auto& attrs = a.entry("meta").attrs;
  auto attr = [&](const std::string& key) -> const std::string& {
    auto it = attrs.find(key);
    if (it == attrs.end())
      throw SchemaError("checkpoint " + dir + ": missing attribute " + key);
    return it->second;
  };
  Checkpoint ck;
  ck.model_cfg.variant = ModelConfig::variant_from_string(attr("variant"));
  ck.model_cfg.depth = std::stoi(attr("depth"));
  ck.model_cfg.base_filters = std::stoi(attr("base_filters"));
  ck.model_cfg.num_classes = std::stoi(attr("num_classes"));
  ck.model_cfg.input_h = std::stoi(attr("input_h"));
  ck.model_cfg.input_w = std::stoi(attr("input_w"));
  ck.model_cfg.prior.mu_prior = std::stof(attr("prior_mu"));
  ck.model_cfg.prior.sigma_prior = std::stof(attr("prior_sigma"));
  ck.model_cfg.dropout.rate = std::stof(attr("dropout_rate"));
  ck.model_cfg.dropout.placement = attr("dropout_placement") == "middle"
                                       ? DropoutConfig::kMiddleLayers
                                       : DropoutConfig::kAllLayers;
  ck.stats.mean = std::stod(attr("norm_mean"));
  ck.stats.variance = std::stod(attr("norm_variance"));
  ck.norm_mode = attr("norm_mode") == "variance" ? TrainConfig::kVariance
                                                 : TrainConfig::kStddev;
  ck.crop = std::stoi(attr("crop"));
  ck.best_epoch = std::stoi(attr("best_epoch"));
  for (const auto& e : a.entries())
    if (e.name != "meta") ck.params[e.name] = a.read_f32(e.name);
  return ck;
}

void cmd_gen_data(const RunConfig& cfg, const std::string& out_dir,
                  std::optional<uint64_t> seed, bool force) {
  PhantomConfig p = phantom_config_from(cfg);
  if (seed) p.seed = *seed;
  check_config_keys(cfg);
  const PhantomSet set = generate_phantom(p);
  save_dataset((fs::path(out_dir) / "train").string(), set.train, "train",
               force);
  save_dataset((fs::path(out_dir) / "val").string(), set.val, "val", force);
  save_dataset((fs::path(out_dir) / "test").string(), set.test, "test",
               force);
  std::cout << "train " << set.train.size() << "\nval " << set.val.size()
            << "\ntest " << set.test.size() << "\n";
}

void cmd_train(const RunConfig& cfg, const std::string& variant,
               const std::string& data_dir, const std::string& out_dir,
               std::optional<uint64_t> seed, bool force, int jobs) {
  const ModelConfig model_cfg = model_config_from(cfg, variant);
  TrainConfig train_cfg = train_config_from(cfg);
  if (seed) train_cfg.seed = *seed;
  check_config_keys(cfg);

  const Dataset train_set =
      load_dataset((fs::path(data_dir) / "train").string());
  const Dataset val_set = load_dataset((fs::path(data_dir) / "val").string());

  if (variant == "ensemble") {
    claim_output_dir(out_dir, "member_0/manifest.txt", force);
    const auto results =
        train_ensemble(model_cfg, train_set, val_set, train_cfg, jobs);
    for (size_t k = 0; k < results.size(); ++k) {
      const std::string mdir =
          (fs::path(out_dir) / ("member_" + std::to_string(k))).string();
      UNet model(model_cfg, Rng(0));
      model.set_parameters(results[k].best_params);
      save_checkpoint(mdir, model, results[k].stats, train_cfg,
                      results[k].best_epoch, force);
      write_history_csv((fs::path(mdir) / "history.csv").string(),
                        results[k].history);
    }
    std::cout << "trained " << results.size() << " ensemble members\n";
  } else {
    UNet model(model_cfg, Rng(train_cfg.seed).fork(0));
    const TrainResult result = train(model, train_set, val_set, train_cfg);
    save_checkpoint(out_dir, model, result.stats, train_cfg,
                    result.best_epoch, force);
    write_history_csv((fs::path(out_dir) / "history.csv").string(),
                      result.history);
    std::cout << "best epoch " << result.best_epoch << "\n";
  }
}

void cmd_distort(const RunConfig& cfg, const std::string& data_dir,
                 const std::string& kind, int degree,
                 const std::string& out_dir, std::optional<uint64_t> seed,
                 bool force) {
  DistortionSpec spec;
  spec.kind = DistortionSpec::kind_from_string(kind);
  spec.degree = degree;
  spec.validate();
  const uint64_t s = seed.value_or(cfg.get_u64("distort_seed", 99));
  check_config_keys(cfg);

  TensorArchive src = TensorArchive::open(data_dir);
  std::string split = "test";
  if (src.contains("image_0")) {
    const auto& attrs = src.entry("image_0").attrs;
    if (auto it = attrs.find("split"); it != attrs.end()) split = it->second;
  }
  Dataset cases = load_dataset(data_dir);
  const double param = spec.parameter();
  Rng rng(s);
  int skipped = 0;
  for (size_t i = 0; i < cases.size(); ++i) {
    SegCase& c = cases[i];
    switch (spec.kind) {
      case DistortionSpec::kNoise: {
        Rng case_rng = rng.fork(uint64_t(i));
        c.image = rician_noise(c.image, param, case_rng);
        break;
      }
      case DistortionSpec::kBlur:
        c.image = gaussian_blur(c.image, c.h, c.w, param);
        break;
      case DistortionSpec::kStretch: {
        StretchResult r = stretch(c.image, c.mask, param);
        if (r.skipped) ++skipped;
        c.image = std::move(r.image);
        c.mask = std::move(r.mask);
        break;
      }
    }
  }
  save_dataset(out_dir, cases, split, force);
  TensorArchive out = TensorArchive::open(out_dir);
  out.add_f32("distortion_meta", {1}, {float(param)},
              {{"kind", kind},
               {"degree", std::to_string(degree)},
               {"parameter", fmt17(param)},
               {"seed", std::to_string(s)}});
  std::cout << "distorted " << cases.size() << " cases (" << kind
            << " degree " << degree << ", parameter " << fmt9(param) << ")";
  if (skipped) std::cout << "; skipped " << skipped << " empty-mask cases";
  std::cout << "\n";
}

namespace {

struct EvalRowSet {
  std::string image_id;
  int subject_id = 0, slice_index = 0;
  double nll_v = 0, brier_v = 0, entropy_v = 0, mi_v = 0;
  double dice_v[3], assd_v[3], hd_v[3], dice_ws_v[3], assd_ws_v[3];
};

// ASSD/HD made total for reporting: both-empty -> 0, one-empty -> image
// diagonal (mirrors the within-samples conventions).
double total_surface_metric(const BinaryRegion& a, const BinaryRegion& b,
                            bool hausdorff_metric) {
  const bool ea = a.empty(), eb = b.empty();
  if (ea && eb) return 0.0;
  if (ea || eb) return a.diagonal_mm();
  return hausdorff_metric ? hausdorff(a, b) : assd(a, b);
}

}  // namespace

void cmd_eval(const RunConfig& cfg, const std::vector<std::string>& checkpoints,
              const std::string& data_dir, int samples,
              const std::string& out_csv, std::optional<uint64_t> seed) {
  if (checkpoints.empty()) throw ConfigError("eval: no checkpoints given");
  if (samples < 1) throw ConfigError("eval: samples must be >= 1");
  const uint64_t s = seed.value_or(cfg.get_u64("eval_seed", 4242));
  const int jobs = std::max(1, cfg.get_int("eval_jobs", 1));
  check_config_keys(cfg);

  std::vector<Checkpoint> cks;
  for (const auto& dir : checkpoints) cks.push_back(load_checkpoint(dir));
  const Checkpoint& ck0 = cks.front();
  const bool ensemble = cks.size() > 1;
  if (ensemble)
    for (const auto& ck : cks)
      if (ck.model_cfg.variant != ModelConfig::kPlain)
        throw ConfigError("eval: multi-checkpoint mode requires plain members");

  const Dataset data = load_dataset(data_dir);
  if (data.empty()) throw IoError("eval: empty dataset " + data_dir);
  if (ck0.crop == 0 &&
      (data[0].h != ck0.model_cfg.input_h || data[0].w != ck0.model_cfg.input_w))
    throw ConfigError("eval: dataset shape " + std::to_string(data[0].h) +
                      "x" + std::to_string(data[0].w) +
                      " does not match model input");

  std::vector<EvalRowSet> rows(data.size());
  std::atomic<size_t> next{0};
  std::vector<std::string> failures(static_cast<size_t>(jobs));

  auto worker = [&](int wid) {
    try {
      // Per-thread models (forward mutates graph state).
      std::vector<UNet> models;
      std::vector<UNet*> model_ptrs;
      for (const auto& ck : cks) {
        models.emplace_back(ck.model_cfg, Rng(0));
        models.back().set_parameters(ck.params);
      }
      for (auto& m : models) model_ptrs.push_back(&m);
      const Rng base(s);
      for (size_t i = next.fetch_add(1); i < data.size();
           i = next.fetch_add(1)) {
        const SegCase& c = data[i];
        const auto img = normalize_and_crop(c.image, c.h, c.w, ck0.stats,
                                            ck0.norm_mode, ck0.crop);
        const LabelMask gt = crop_mask(c.mask, ck0.crop);
        Rng case_rng = base.fork(uint64_t(i));
        SampleStack stack =
            ensemble ? sample_stack_ensemble(model_ptrs, img)
                     : sample_stack(models[0], img, samples, case_rng);
        EvalRowSet& r = rows[i];
        r.image_id = c.id();
        r.subject_id = c.subject_id;
        r.slice_index = c.slice_index;
        r.nll_v = nll(stack.mean, stack.channels, gt);
        r.brier_v = brier(stack.mean, stack.channels, gt);
        r.entropy_v = predictive_entropy(stack.mean, stack.channels, stack.h,
                                         stack.w);
        r.mi_v = mutual_information(stack);
        const LabelMask pred =
            argmax_mask(stack.mean, stack.channels, stack.h, stack.w);
        const std::pair<float, float> sp = {c.spacing_mm, c.spacing_mm};
        for (uint8_t cls = 1; cls <= 3; ++cls) {
          const auto pa = BinaryRegion::from_labels(pred, cls, sp);
          const auto ga = BinaryRegion::from_labels(gt, cls, sp);
          r.dice_v[cls - 1] = dice(pa, ga);
          r.assd_v[cls - 1] = total_surface_metric(pa, ga, false);
          r.hd_v[cls - 1] = total_surface_metric(pa, ga, true);
          r.dice_ws_v[cls - 1] = dice_within_samples(stack, cls);
          r.assd_ws_v[cls - 1] = assd_within_samples(stack, cls, sp);
        }
      }
    } catch (const std::exception& e) {
      failures[size_t(wid)] = e.what();
    }
  };

  if (jobs <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw NumericError("eval failed: " + f);

  fs::create_directories(fs::path(out_csv).parent_path().empty()
                             ? "."
                             : fs::path(out_csv).parent_path().string());
  std::ofstream out(out_csv);
  if (!out) throw IoError("cannot write " + out_csv);
  out << "image_id,subject_id,slice_index,structure,dice,assd_mm,hd_mm,nll,"
         "brier,entropy,mutual_information,dice_ws,assd_ws\n";
  for (const auto& r : rows)
    for (int k = 0; k < 3; ++k)
      out << r.image_id << ',' << r.subject_id << ',' << r.slice_index << ','
          << kStructures[k] << ',' << fmt9(r.dice_v[k]) << ','
          << fmt9(r.assd_v[k]) << ',' << fmt9(r.hd_v[k]) << ','
          << fmt9(r.nll_v) << ',' << fmt9(r.brier_v) << ','
          << fmt9(r.entropy_v) << ',' << fmt9(r.mi_v) << ','
          << fmt9(r.dice_ws_v[k]) << ',' << fmt9(r.assd_ws_v[k]) << '\n';
  std::cout << "wrote " << rows.size() * 3 << " rows to " << out_csv << "\n";
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return int(i);
  throw SchemaError("CSV: missing column '" + name + "'");
}

CsvTable CsvTable::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw SchemaError("CSV " + path + ": ragged row");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw SchemaError("CSV " + path + ": empty file");
  return t;
}

void cmd_qc(const RunConfig& cfg, const std::string& eval_csv,
            const std::string& out_dir, bool force) {
  QcThresholds th;
  th.lv = cfg.get_double("qc_threshold_lv", th.lv);
  th.myo = cfg.get_double("qc_threshold_myo", th.myo);
  th.rv = cfg.get_double("qc_threshold_rv", th.rv);
  const double target = cfg.get_double("qc_target", 0.05);
  check_config_keys(cfg);

  const CsvTable t = CsvTable::read(eval_csv);
  const int ci = t.column("image_id"), cs = t.column("structure");
  const int ca = t.column("assd_mm"), cw = t.column("assd_ws");
  const int csub = t.column("subject_id"), csl = t.column("slice_index");

  claim_output_dir(out_dir, "summary.csv", force);
  std::ofstream summary((fs::path(out_dir) / "summary.csv").string());
  summary << "structure,method,auc,review_fraction_at_target\n";

  for (const char* structure : kStructures) {
    std::vector<QcCase> cases;
    for (const auto& row : t.rows) {
      if (row[size_t(cs)] != structure) continue;
      QcCase q;
      q.id = row[size_t(ci)];
      q.uncertainty = std::stod(row[size_t(cw)]);
      q.poor = classify_poor(std::stod(row[size_t(ca)]),
                             th.for_structure(structure));
      q.subject_id = std::stoi(row[size_t(csub)]);
      q.slice_index = std::stoi(row[size_t(csl)]);
      cases.push_back(std::move(q));
    }
    if (cases.empty())
      throw SchemaError("qc: no rows for structure " +
                        std::string(structure));

    const QcCurve unc = qc_curve(cases);
    const QcCurve rnd = random_baseline(cases);
    const QcCurve slc = slice_position_baseline(cases);

    std::ofstream curves(
        (fs::path(out_dir) / ("curve_" + std::string(structure) + ".csv"))
            .string());
    curves << "method,reviewed_fraction,remaining_poor_fraction\n";
    const std::pair<const char*, const QcCurve*> methods[] = {
        {"uncertainty", &unc}, {"random", &rnd}, {"slice_position", &slc}};
    for (const auto& [name, curve] : methods) {
      for (const auto& p : curve->points)
        curves << name << ',' << fmt9(p.reviewed_fraction) << ','
               << fmt9(p.remaining_poor_fraction) << '\n';
      summary << structure << ',' << name << ',' << fmt9(curve->auc) << ','
              << fmt9(review_fraction_for_target(*curve, target)) << '\n';
    }

    std::vector<SvgSeries> series;
    const char* colors[] = {"#1f77b4", "#7f7f7f", "#d62728"};
    for (int m = 0; m < 3; ++m) {
      SvgSeries s;
      s.label = methods[m].first;
      s.color = colors[m];
      for (const auto& p : methods[m].second->points)
        s.points.emplace_back(p.reviewed_fraction, p.remaining_poor_fraction);
      series.push_back(std::move(s));
    }
    write_line_chart(
        (fs::path(out_dir) / ("qc_" + std::string(structure) + ".svg"))
            .string(),
        "QC review curve (" + std::string(structure) + ")",
        "fraction reviewed", "poor segmentations remaining", series);
  }
  std::cout << "wrote QC curves and summary to " << out_dir << "\n";
}

void cmd_report(const std::vector<std::string>& eval_csvs,
                const std::vector<std::string>& labels,
                const std::string& out_dir, bool force) {
  if (eval_csvs.empty()) throw ConfigError("report: no eval CSVs given");
  if (!labels.empty() && labels.size() != eval_csvs.size())
    throw ConfigError("report: label count must match CSV count");
  claim_output_dir(out_dir, "report.csv", force);

  std::ofstream out((fs::path(out_dir) / "report.csv").string());
  out << "method,mean_dice,mean_assd_mm,mean_nll,mean_brier,mean_entropy,"
         "mean_mutual_information\n";
  std::vector<SvgSeries> dice_series;
  SvgSeries dice_points{"mean dice", "#1f77b4", {}};
  SvgSeries entropy_points{"mean entropy", "#d62728", {}};
  for (size_t m = 0; m < eval_csvs.size(); ++m) {
    const CsvTable t = CsvTable::read(eval_csvs[m]);
    const int cd = t.column("dice"), ca = t.column("assd_mm");
    const int cn = t.column("nll"), cb = t.column("brier");
    const int ce = t.column("entropy"), cm = t.column("mutual_information");
    const int cid = t.column("image_id");
    double dice_sum = 0, assd_sum = 0;
    double nll_sum = 0, brier_sum = 0, ent_sum = 0, mi_sum = 0;
    std::set<std::string> images;
    for (const auto& row : t.rows) {
      dice_sum += std::stod(row[size_t(cd)]);
      assd_sum += std::stod(row[size_t(ca)]);
      if (images.insert(row[size_t(cid)]).second) {
        nll_sum += std::stod(row[size_t(cn)]);
        brier_sum += std::stod(row[size_t(cb)]);
        ent_sum += std::stod(row[size_t(ce)]);
        mi_sum += std::stod(row[size_t(cm)]);
      }
    }
    const double nr = double(t.rows.size());
    const double ni = double(images.size());
    const std::string label =
        labels.empty() ? fs::path(eval_csvs[m]).stem().string() : labels[m];
    out << label << ',' << fmt9(dice_sum / nr) << ',' << fmt9(assd_sum / nr)
        << ',' << fmt9(nll_sum / ni) << ',' << fmt9(brier_sum / ni) << ','
        << fmt9(ent_sum / ni) << ',' << fmt9(mi_sum / ni) << '\n';
    dice_points.points.emplace_back(double(m), dice_sum / nr);
    entropy_points.points.emplace_back(double(m), ent_sum / ni);
  }
  dice_series.push_back(std::move(dice_points));
  dice_series.push_back(std::move(entropy_points));
  write_line_chart((fs::path(out_dir) / "report.svg").string(),
                   "Method comparison", "method index", "value", dice_series);
  std::cout << "wrote report to " << out_dir << "\n";
}

}  // namespace uncseg
