// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "voxdet/cli.hpp"
#include "voxdet/io.hpp"

using namespace voxdet;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kGt = R"([
  {"scan_id": "a", "spacing_mm": [5, 1, 1], "boxes": [
    {"box": [0, 0, 0, 2, 10, 10], "label": 0}, {"box": [4, 20, 20, 6, 40, 40], "label": 0}]},
  {"scan_id": "b", "spacing_mm": [5, 1, 1], "boxes": [{"box": [1, 5, 5, 3, 15, 12], "label": 0}]},
  {"scan_id": "c", "spacing_mm": [5, 1, 1], "boxes": []}
])";

}  // namespace

TEST_CASE("iou and loss commands") {
  auto r = run({"iou", "--a", "0,0,0,2,2,2", "--b", "1,1,1,3,3,3"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("0.0666666") != std::string::npos);
  r = run({"--format", "structured", "loss", "--kind", "vciou", "--pred", "0,0,0,4,2,2", "--gt",
           "0,0,0,2,2,2"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["value"].get<double>() == doctest::Approx(0.5 + 0.01206).epsilon(1e-3));
}

TEST_CASE("exit codes") {
  CHECK(run({"iou", "--a", "0,0,0,2,2,2"}).code == kExitUsageError);
  CHECK(run({"bogus"}).code == kExitUsageError);
  CHECK(run({"iou", "--a", "0,0,0,0,2,2", "--b", "1,1,1,3,3,3"}).code == kExitDomainError);
  CHECK(run({"eval", "--pred", "/nonexistent.json", "--gt", "/nonexistent.json"}).code ==
        kExitDomainError);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("eval on identical files") {
  const auto dir = testing_support::temp_dir("cli_eval");
  write_text_file(dir / "g.json", kGt);
  auto scans = read_boxes(dir / "g.json");
  for (auto& s : scans)
    for (auto& b : s.boxes) b.score = 0.9;
  write_boxes(dir / "p.json", scans);
  const auto r = run({"--format", "structured", "eval", "--pred", (dir / "p.json").string(), "--gt",
                      (dir / "g.json").string(), "--iou", "0.1,0.3"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["thresholds"].size() == 2);
  for (const auto& t : j["thresholds"]) {
    CHECK(t["ap"].get<double>() == 1.0);
    CHECK(t["ar"].get<double>() == 1.0);
  }
  CHECK(j["n_scans"] == 3);
  CHECK(run({"eval", "--pred", (dir / "p.json").string(), "--gt", (dir / "g.json").string()}).code ==
        kExitOk);
  // gt file has no scores
  CHECK(run({"eval", "--pred", (dir / "g.json").string(), "--gt", (dir / "g.json").string()}).code ==
        kExitDomainError);
}

TEST_CASE("noise is byte-identical for a fixed seed") {
  const auto dir = testing_support::temp_dir("cli_noise");
  write_text_file(dir / "g.json", kGt);
  const std::vector<std::string> base{"noise", "--in", (dir / "g.json").string(), "--mode",
                                      "shrink", "--magnitude", "0.1", "--seed", "7", "--out"};
  auto a = base, b = base;
  a.push_back((dir / "a.json").string());
  b.push_back((dir / "b.json").string());
  REQUIRE(run(a).code == kExitOk);
  REQUIRE(run(b).code == kExitOk);
  CHECK(read_text_file(dir / "a.json") == read_text_file(dir / "b.json"));
  CHECK(read_text_file(dir / "a.json") != read_text_file(dir / "g.json"));
}

TEST_CASE("mask2boxes matches the flood fill oracle") {
  const auto dir = testing_support::temp_dir("cli_m2b");
  std::mt19937_64 g(5);
  const auto m = testing_support::random_label_map(g, 12, 0.15, 1);
  write_volume(dir / "v.json", m);
  const auto r = run({"mask2boxes", "--volume", (dir / "v.json").string(), "--connectivity", "6",
                      "--scan-id", "v", "--out", (dir / "b.json").string()});
  REQUIRE(r.code == kExitOk);
  const auto scans = read_boxes(dir / "b.json");
  const auto ref = oracle::flood_fill(m, 6);
  REQUIRE(scans.size() == 1);
  CHECK(scans[0].scan_id == "v");
  REQUIRE(scans[0].boxes.size() == ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(scans[0].boxes[i].box == ref[i].box);
}

TEST_CASE("nms, froc, anchors and match commands") {
  const auto dir = testing_support::temp_dir("cli_misc");
  write_text_file(dir / "d.json", R"({"scan_id": "a", "boxes": [
    {"box": [0, 0, 0, 2, 2, 2], "score": 0.9}, {"box": [0, 0, 0, 2, 2, 2.2], "score": 0.8},
    {"box": [5, 5, 5, 7, 7, 7], "score": 0.7}]})");
  auto r = run({"nms", "--in", (dir / "d.json").string(), "--iou", "0.5"});
  REQUIRE(r.code == kExitOk);
  CHECK(parse_boxes(r.out, "out")[0].boxes.size() == 2);

  write_text_file(dir / "g.json", kGt);
  r = run({"froc", "--pred", (dir / "d.json").string(), "--gt", (dir / "g.json").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("# fp_per_scan sensitivity") != std::string::npos);

  r = run({"anchors", "fit", "--boxes", (dir / "g.json").string(), "--k", "2", "--out",
           (dir / "cfg.json").string()});
  REQUIRE(r.code == kExitOk);
  r = run({"anchors", "gen", "--config", (dir / "cfg.json").string(), "--shape", "8,64,64"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("total") != std::string::npos);
  r = run({"match", "--config", (dir / "cfg.json").string(), "--shape", "8,64,64", "--gt",
           (dir / "g.json").string()});
  CHECK(r.code == kExitOk);
  CHECK(run({"anchors", "fit", "--boxes", (dir / "g.json").string(), "--k", "9"}).code ==
        kExitDomainError);
}
