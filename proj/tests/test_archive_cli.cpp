#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "uncseg/archive.hpp"
#include "uncseg/commands.hpp"
#include "uncseg/config.hpp"
#include "uncseg/dataset.hpp"
#include "uncseg/errors.hpp"
#include "uncseg/phantom.hpp"
#include "uncseg/train.hpp"
#include "uncseg/unet.hpp"

namespace fs = std::filesystem;
using namespace uncseg;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("uncseg_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string str() const { return path.string(); }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("tensor archive round trip with attributes") {
  TempDir tmp;
  {
    TensorArchive a = TensorArchive::create(tmp.sub("arch"), false);
    a.add_f32("weights", {2, 3}, {1, 2, 3, 4, 5, 6}, {{"role", "kernel"}});
    a.add_u8("labels", {2, 2}, {0, 1, 2, 3});
  }
  TensorArchive b = TensorArchive::open(tmp.sub("arch"));
  CHECK(b.read_f32("weights") == std::vector<float>{1, 2, 3, 4, 5, 6});
  CHECK(b.read_u8("labels") == std::vector<uint8_t>{0, 1, 2, 3});
  CHECK(b.entry("weights").attrs.at("role") == "kernel");
  CHECK(b.entry("weights").shape == Shape{2, 3});
  CHECK(b.contains("labels"));
  CHECK(!b.contains("missing"));
  CHECK_THROWS_AS(b.entry("missing"), IoError);
}

TEST_CASE("archive refuses duplicates, existing dirs, and corrupt files") {
  TempDir tmp;
  TensorArchive a = TensorArchive::create(tmp.sub("arch"), false);
  a.add_f32("x", {2}, {1, 2});
  CHECK_THROWS_AS(a.add_f32("x", {2}, {3, 4}), SchemaError);
  CHECK_THROWS_AS(TensorArchive::create(tmp.sub("arch"), false), IoError);
  // force wipes and recreates
  TensorArchive b = TensorArchive::create(tmp.sub("arch"), true);
  CHECK(!b.contains("x"));
  b.add_f32("y", {3}, {1, 2, 3});
  // truncate the binary: open() must detect the byte-length mismatch
  std::ofstream((fs::path(tmp.sub("arch")) / "y.bin").string(),
                std::ios::trunc)
      << "xy";
  CHECK_THROWS_AS(TensorArchive::open(tmp.sub("arch")), SchemaError);
}

TEST_CASE("dataset save/load round trip") {
  TempDir tmp;
  PhantomConfig cfg;
  cfg.subjects = 3;
  cfg.train_subjects = 3;
  cfg.val_subjects = 0;
  cfg.test_subjects = 0;
  cfg.slices_per_subject = 3;
  const PhantomSet set = generate_phantom(cfg);
  save_dataset(tmp.sub("data"), set.train, "train", false);
  const Dataset loaded = load_dataset(tmp.sub("data"));
  REQUIRE(loaded.size() == set.train.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].image == set.train[i].image);
    CHECK(loaded[i].mask == set.train[i].mask);
    CHECK(loaded[i].subject_id == set.train[i].subject_id);
    CHECK(loaded[i].slice_index == set.train[i].slice_index);
    CHECK(loaded[i].spacing_mm == set.train[i].spacing_mm);
  }
}

TEST_CASE("run config parsing") {
  const RunConfig cfg = RunConfig::parse_string(
      "# comment\n"
      "\n"
      "subjects = 12\n"
      "spacing_mm = 1.25\n"
      "norm_mode = stddev\n"
      "debug = true\n");
  CHECK(cfg.get_int("subjects", 0) == 12);
  CHECK(cfg.get_double("spacing_mm", 0) == doctest::Approx(1.25));
  CHECK(cfg.get_string("norm_mode", "") == "stddev");
  CHECK(cfg.get_bool("debug", false));
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK(cfg.unconsumed().empty());

  CHECK_THROWS_AS(RunConfig::parse_string("a = 1\na = 2\n"), SchemaError);
  CHECK_THROWS_AS(RunConfig::parse_string("not a pair\n"), SchemaError);
  const RunConfig bad = RunConfig::parse_string("subjects = many\n");
  CHECK_THROWS_AS(bad.get_int("subjects", 0), SchemaError);
  const RunConfig stray = RunConfig::parse_string("bogus_key = 1\n");
  CHECK_THROWS_AS(stray.require_all_consumed(), SchemaError);
}

TEST_CASE("checkpoint save/load round trip") {
  TempDir tmp;
  ModelConfig mc;
  mc.variant = ModelConfig::kBbb;
  mc.depth = 3;
  mc.base_filters = 4;
  mc.input_h = 16;
  mc.input_w = 16;
  mc.prior.sigma_prior = 0.1f;
  UNet model(mc, Rng(77));
  DatasetStats stats;
  stats.mean = 0.123456789;
  stats.variance = 0.0345678912;
  TrainConfig tc;
  tc.norm_mode = TrainConfig::kStddev;
  save_checkpoint(tmp.sub("ckpt"), model, stats, tc, 17, false);
  const Checkpoint ck = load_checkpoint(tmp.sub("ckpt"));
  CHECK(ck.model_cfg.variant == ModelConfig::kBbb);
  CHECK(ck.model_cfg.depth == 3);
  CHECK(ck.stats.mean == stats.mean);  // %.17g round trip is exact
  CHECK(ck.stats.variance == stats.variance);
  CHECK(ck.norm_mode == TrainConfig::kStddev);
  CHECK(ck.best_epoch == 17);
  CHECK(ck.params == model.snapshot_parameters());
}

TEST_CASE("cmd_gen_data writes the expected case counts and refuses rerun") {
  TempDir tmp;
  RunConfig cfg = RunConfig::parse_string(
      "subjects = 6\ntrain_subjects = 4\nval_subjects = 1\n"
      "test_subjects = 1\nslices_per_subject = 3\n");
  cmd_gen_data(cfg, tmp.sub("out"), std::nullopt, false);
  CHECK(load_dataset(tmp.sub("out") + "/train").size() == 12);
  CHECK(load_dataset(tmp.sub("out") + "/val").size() == 3);
  CHECK(load_dataset(tmp.sub("out") + "/test").size() == 3);
  CHECK_THROWS_AS(cmd_gen_data(cfg, tmp.sub("out"), std::nullopt, false),
                  IoError);
  // unknown key rejected
  RunConfig bad = RunConfig::parse_string("subjects = 6\nwhatever = 3\n");
  CHECK_THROWS_AS(cmd_gen_data(bad, tmp.sub("out2"), std::nullopt, false),
                  SchemaError);
}

TEST_CASE("cmd_distort records spec fields and leaves masks per contract") {
  TempDir tmp;
  RunConfig cfg = RunConfig::parse_string(
      "subjects = 3\ntrain_subjects = 1\nval_subjects = 1\n"
      "test_subjects = 1\nslices_per_subject = 3\n");
  cmd_gen_data(cfg, tmp.sub("d"), std::nullopt, false);
  cmd_distort(cfg, tmp.sub("d") + "/test", "noise", 3,
              tmp.sub("noise3"), std::nullopt, false);
  const TensorArchive a = TensorArchive::open(tmp.sub("noise3"));
  REQUIRE(a.contains("distortion_meta"));
  CHECK(a.entry("distortion_meta").attrs.at("kind") == "noise");
  CHECK(a.entry("distortion_meta").attrs.at("degree") == "3");
  const Dataset clean = load_dataset(tmp.sub("d") + "/test");
  const Dataset noisy = load_dataset(tmp.sub("noise3"));
  REQUIRE(clean.size() == noisy.size());
  for (size_t i = 0; i < clean.size(); ++i) {
    CHECK(clean[i].mask == noisy[i].mask);  // noise leaves masks untouched
    CHECK(clean[i].image != noisy[i].image);
  }
  // stretch transforms the mask too
  cmd_distort(cfg, tmp.sub("d") + "/test", "stretch", 4,
              tmp.sub("stretch4"), std::nullopt, false);
  const Dataset stretched = load_dataset(tmp.sub("stretch4"));
  bool any_mask_changed = false;
  for (size_t i = 0; i < clean.size(); ++i)
    if (!(clean[i].mask == stretched[i].mask)) any_mask_changed = true;
  CHECK(any_mask_changed);
  CHECK_THROWS_AS(cmd_distort(cfg, tmp.sub("d") + "/test", "noise", 9,
                              tmp.sub("x"), std::nullopt, false),
                  ConfigError);
}

TEST_CASE("csv table reader") {
  TempDir tmp;
  const std::string path = tmp.sub("t.csv");
  std::ofstream(path) << "a,b,c\n1,2,3\n4,5,6\n";
  const CsvTable t = CsvTable::read(path);
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("z"), SchemaError);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][2] == "6");
  std::ofstream(tmp.sub("bad.csv")) << "a,b\n1\n";
  CHECK_THROWS_AS(CsvTable::read(tmp.sub("bad.csv")), SchemaError);
}

TEST_CASE("cmd_qc produces curves, summary, and charts from a built CSV") {
  TempDir tmp;
  const std::string csv = tmp.sub("eval.csv");
  std::ofstream out(csv);
  out << "image_id,subject_id,slice_index,structure,dice,assd_mm,hd_mm,nll,"
         "brier,entropy,mutual_information,dice_ws,assd_ws\n";
  // Perfect ordering: assd_ws ranks exactly by assd. 4 images, lv only poor
  // for the two with assd > 1.17.
  const double assd[4] = {3.0, 2.0, 1.0, 0.5};
  for (int i = 0; i < 4; ++i)
    for (const char* s : {"lv", "myo", "rv"})
      out << "s" << i << "_0," << i << ",0," << s << ",0.9," << assd[i]
          << ",5,0.2,0.1,0.3,0.01," << 0.9 << "," << assd[i] * 0.5 << "\n";
  out.close();
  RunConfig cfg = RunConfig::parse_string("qc_target = 0.0\n");
  cmd_qc(cfg, csv, tmp.sub("qc"), false);
  CHECK(fs::exists(tmp.sub("qc") + "/summary.csv"));
  CHECK(fs::exists(tmp.sub("qc") + "/curve_lv.csv"));
  CHECK(fs::exists(tmp.sub("qc") + "/qc_rv.svg"));
  const CsvTable summary = CsvTable::read(tmp.sub("qc") + "/summary.csv");
  // lv/uncertainty: perfect ranking of P=2,N=4 -> AUC 0.125 (hand value).
  bool found = false;
  for (const auto& row : summary.rows)
    if (row[0] == "lv" && row[1] == "uncertainty") {
      CHECK(std::stod(row[2]) == doctest::Approx(0.125).epsilon(1e-9));
      CHECK(std::stod(row[3]) == doctest::Approx(0.5).epsilon(1e-9));
      found = true;
    }
  CHECK(found);
  // missing column -> schema error naming it
  std::ofstream(tmp.sub("short.csv")) << "image_id,structure\nx,lv\n";
  CHECK_THROWS_AS(cmd_qc(cfg, tmp.sub("short.csv"), tmp.sub("qc2"), false),
                  SchemaError);
}

TEST_CASE("cmd_report aggregates eval CSVs") {
  TempDir tmp;
  const std::string csv = tmp.sub("eval.csv");
  std::ofstream out(csv);
  out << "image_id,subject_id,slice_index,structure,dice,assd_mm,hd_mm,nll,"
         "brier,entropy,mutual_information,dice_ws,assd_ws\n"
      << "s0_0,0,0,lv,0.8,1,2,0.5,0.2,0.4,0.05,0.9,0.3\n"
      << "s0_0,0,0,myo,0.6,1,2,0.5,0.2,0.4,0.05,0.9,0.3\n";
  out.close();
  cmd_report({csv}, {"demo"}, tmp.sub("rep"), false);
  const CsvTable rep = CsvTable::read(tmp.sub("rep") + "/report.csv");
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0][0] == "demo");
  CHECK(std::stod(rep.rows[0][1]) == doctest::Approx(0.7));  // mean dice
  CHECK(std::stod(rep.rows[0][3]) == doctest::Approx(0.5));  // image-level nll
  CHECK(fs::exists(tmp.sub("rep") + "/report.svg"));
}
