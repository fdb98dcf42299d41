// Copyright 2026 The wmark Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wmark/cli.hpp"
#include "wmark/image.hpp"
#include "wmark/pipeline.hpp"
#include "wmark/synthetic.hpp"

using namespace wmark;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "wmark");
  std::ostringstream out, err;
  Run r;
  r.code = cli_dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Twelve 16x16 textures, three identities, plus configs for every subcommand.
struct Workspace {
  fs::path dir;

  Workspace() {
    dir = fs::temp_directory_path() / "wmark_cli";
    fs::remove_all(dir);
    fs::create_directories(dir / "faces");
    const auto images = synth::textures(41, 12, 3, 16, 16);
    std::string manifest = "# toy faces\npath,identity\n";
    for (std::size_t i = 0; i < images.size(); ++i) {
      const std::string name = "faces/f" + std::to_string(i) + ".ppm";
      save_ppm(images[i], dir / name);
      manifest += name + ",person" + std::to_string(i % 3) + "\n";
    }
    put(dir / "faces.csv", manifest);
    put(dir / "train.cfg",
        "# tiny model\nsteps = 4\nbatch_size = 4\nimage_size = 16\nmessage_length = 8\nbase_channels = 4\n"
        "encoder_blocks = 1\ndecoder_blocks = 1\np_aug = 0.5\ntrain_images = 8\nseed = 3\n");
    put(dir / "embedder.cfg", "epochs = 2\nbatch_size = 4\ninput_size = 16\nbase_channels = 4\nembedding_dim = 8\n");
    put(dir / "sweep.cfg", "kinds = identity, crop, jpeg\ncrop_grid = 1, 0.8\njpeg_grid = 90, 50\nrepetitions = 2\n");
    put(dir / "verify.cfg", "fars = 0.05, 0.5\nmax_imposters = 100\n");
  }

  std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

const Workspace& workspace() {
  static const Workspace ws;
  return ws;
}

const std::string& trained_model() {
  static const std::string path = [] {
    const Workspace& ws = workspace();
    const Run r = run({"train-wm", ws / "model.wmf", "--config", ws / "train.cfg"});
    REQUIRE(r.code == 0);
    return ws / "model.wmf";
  }();
  return path;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  const Workspace& ws = workspace();
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"paint"}).code == kExitUsage);
  CHECK(run({"extract", "--bogus", "x"}).code == kExitUsage);
  CHECK(run({"extract"}).code == kExitUsage);

  const Run missing = run({"train-wm", ws / "m.wmf", "--config", ws / "nowhere.cfg"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find(ws / "nowhere.cfg") != std::string::npos);

  put(ws.dir / "typo.cfg", "stpes = 4\n");
  const Run typo = run({"train-wm", ws / "m.wmf", "--config", ws / "typo.cfg"});
  CHECK(typo.code == kExitUsage);
  CHECK(typo.err.find("stpes") != std::string::npos);

  put(ws.dir / "bad_value.cfg", "steps = -3\n");
  CHECK(run({"train-wm", ws / "m.wmf", "--config", ws / "bad_value.cfg"}).code == kExitUsage);
  CHECK(run({"train-wm", ws / "m.wmf", "--seed", "many"}).code == kExitUsage);

  CHECK(run({"extract", "--model", ws / "absent.wmf", ws / "faces/f0.ppm"}).code == kExitUsage);
  CHECK(run({"embed", "--model", trained_model(), "--message", "101", ws / "faces/f0.ppm", ws / "o.ppm"}).code ==
        kExitUsage);
  CHECK(run({"embed", "--model", trained_model(), "--message", "10x01010", ws / "faces/f0.ppm", ws / "o.ppm"}).code ==
        kExitUsage);
  CHECK(run({"verify", ws / "r.txt"}).code == kExitUsage);
  CHECK(run({"verify", ws / "r.txt", "--config", ws / "train.cfg", "--embeddings", ws / "e.txt"}).code ==
        kExitUsage);
}

TEST_CASE("runtime failures exit 2") {
  const Workspace& ws = workspace();
  put(ws.dir / "garbage.wmf", "WMF1 but not really");
  const Run r = run({"extract", "--model", ws / "garbage.wmf", ws / "faces/f0.ppm"});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.rfind("error: ", 0) == 0);

  put(ws.dir / "garbage.ppm", "P6\n2 2\n255\nab");
  CHECK(run({"extract", "--model", trained_model(), ws / "garbage.ppm"}).code == kExitRuntime);
}

TEST_CASE("help exits 0") {
  const Run r = run({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.empty());
  CHECK(r.err.find("train-wm") != std::string::npos);
}

TEST_CASE("train-wm is reproducible and honours --seed") {
  const Workspace& ws = workspace();
  const std::string model = trained_model();
  REQUIRE(run({"train-wm", ws / "again.wmf", "--config", ws / "train.cfg", "--history", ws / "h1.csv"}).code == 0);
  REQUIRE(run({"train-wm", ws / "again2.wmf", "--config", ws / "train.cfg", "--history", ws / "h2.csv"}).code == 0);
  CHECK(slurp(model) == slurp(ws / "again.wmf"));
  CHECK(slurp(ws / "again.wmf") == slurp(ws / "again2.wmf"));
  CHECK(slurp(ws / "h1.csv") == slurp(ws / "h2.csv"));
  CHECK(slurp(ws / "h1.csv").rfind("step,", 0) == 0);

  REQUIRE(run({"train-wm", ws / "seeded.wmf", "--config", ws / "train.cfg", "--seed", "4"}).code == 0);
  CHECK(slurp(ws / "seeded.wmf") != slurp(model));

  std::string cfg = slurp(ws / "train.cfg");
  cfg.replace(cfg.find("seed = 3"), 8, "seed = 4");
  put(ws.dir / "train_seed4.cfg", cfg);
  REQUIRE(run({"train-wm", ws / "seeded2.wmf", "--config", ws / "train_seed4.cfg"}).code == 0);
  CHECK(slurp(ws / "seeded2.wmf") == slurp(ws / "seeded.wmf"));

  REQUIRE(run({"train-wm", ws / "from_manifest.wmf", ws / "faces.csv", "--config", ws / "train.cfg"}).code == 0);
  CHECK(load_model(ws / "from_manifest.wmf").message_length() == 8);
}

TEST_CASE("embed and extract") {
  const Workspace& ws = workspace();
  const std::string model = trained_model();
  const Run e1 = run({"embed", "--model", model, "--message", "10110010", ws / "faces/f0.ppm", ws / "w1.ppm"});
  REQUIRE(e1.code == 0);
  CHECK(e1.out.empty());
  CHECK(e1.err.find("psnr") != std::string::npos);
  REQUIRE(run({"embed", "--model", model, "--message", "10110010", ws / "faces/f0.ppm", ws / "w2.ppm"}).code == 0);
  CHECK(slurp(ws / "w1.ppm") == slurp(ws / "w2.ppm"));

  const Run x = run({"extract", "--model", model, ws / "w1.ppm"});
  REQUIRE(x.code == 0);
  REQUIRE(x.out.size() == 9);
  CHECK(x.out.back() == '\n');
  CHECK(x.out.find_first_not_of("01") == 8);
  CHECK(x.out.substr(0, 8) == load_model(model).extract(load_ppm(ws / "w1.ppm")).to_string());

  put(ws.dir / "sig.txt", "2 4\n1011\n0010\n");
  REQUIRE(run({"embed", "--model", model, "--bitmap", ws / "sig.txt", ws / "faces/f0.ppm", ws / "w3.ppm"}).code == 0);
  CHECK(slurp(ws / "w3.ppm") == slurp(ws / "w1.ppm"));

  const Run r1 = run({"embed", "--model", model, "--seed", "8", ws / "faces/f0.ppm", ws / "r1.ppm"});
  const Run r2 = run({"embed", "--model", model, "--seed", "8", ws / "faces/f0.ppm", ws / "r2.ppm"});
  REQUIRE(r1.code == 0);
  CHECK(r1.err.find("message (random, seed 8)") != std::string::npos);
  CHECK(slurp(ws / "r1.ppm") == slurp(ws / "r2.ppm"));
}

TEST_CASE("watermark-dataset") {
  const Workspace& ws = workspace();
  const std::string model = trained_model();
  for (const char* out : {"wm_a", "wm_b"})
    REQUIRE(run({"watermark-dataset", "--model", model, "--message", "01100111", ws / "faces.csv", ws / out}).code ==
            0);
  const DatasetManifest m = load_manifest(ws.dir / "wm_a" / "manifest.csv");
  REQUIRE(m.entries.size() == 12);
  CHECK(m.entries[5].source == SourceTag::kWatermarked);
  CHECK(m.entries[5].identity == "person2");
  CHECK(slurp(ws / "wm_a/manifest.csv") == slurp(ws / "wm_b/manifest.csv"));
  CHECK(slurp(ws / "wm_a/message.txt") == "01100111\n");
  for (std::size_t i = 0; i < 12; ++i) CHECK(slurp(m.resolve(i)) == slurp(ws.dir / "wm_b" / m.entries[i].path));
}

TEST_CASE("sweep") {
  const Workspace& ws = workspace();
  const std::string model = trained_model();
  REQUIRE(run({"sweep", "--model", model, "--config", ws / "sweep.cfg", ws / "faces.csv", ws / "s1.csv"}).code == 0);
  REQUIRE(run({"sweep", "--model", model, "--config", ws / "sweep.cfg", ws / "faces.csv", ws / "s2.csv"}).code == 0);
  const std::string csv = slurp(ws / "s1.csv");
  CHECK(csv == slurp(ws / "s2.csv"));
  CHECK(csv.substr(0, csv.find('\n')) == "kind,factor,mean_bit_acc,std,n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.find("\nidentity,1,") != std::string::npos);
  CHECK(csv.find("\njpeg,50,") != std::string::npos);
  CHECK(csv.find(",24\n") != std::string::npos);

  REQUIRE(run({"sweep", "--model", model, ws / "faces.csv", ws / "s3.csv"}).code == 0);
  const std::string full = slurp(ws / "s3.csv");
  CHECK(std::count(full.begin(), full.end(), '\n') == 32);

  put(ws.dir / "bad_sweep.cfg", "jpeg_grid = 100, 101\n");
  CHECK(run({"sweep", "--model", model, "--config", ws / "bad_sweep.cfg", ws / "faces.csv", ws / "s4.csv"}).code ==
        kExitUsage);
}

TEST_CASE("train-embedder and verify") {
  const Workspace& ws = workspace();
  const std::string model = trained_model();
  REQUIRE(run({"watermark-dataset", "--model", model, "--seed", "2", ws / "faces.csv", ws / "wm_v"}).code == 0);

  for (const char* out : {"e1.emb", "e2.emb"})
    REQUIRE(run({"train-embedder", ws / "faces.csv", ws / out, "--config", ws / "embedder.cfg", "--history",
                 ws / (std::string(out) + ".csv")})
                .code == 0);
  CHECK(slurp(ws / "e1.emb") == slurp(ws / "e2.emb"));
  CHECK(slurp(ws / "e1.emb.csv") == slurp(ws / "e2.emb.csv"));
  CHECK(slurp(ws / "e1.emb").substr(0, 4) == "EMB1");

  std::vector<std::string> reports;
  for (const char* out : {"v1.txt", "v2.txt"}) {
    const Run r = run({"verify", "--config", ws / "verify.cfg", "--embedder", ws / "e1.emb", "--original",
                       ws / "faces.csv", "--watermarked", ws / "wm_v/manifest.csv", "--save-embeddings",
                       ws / (std::string(out) + ".emb.txt"), ws / out});
    REQUIRE(r.code == 0);
    reports.push_back(slurp(ws / out));
  }
  CHECK(reports[0] == reports[1]);
  CHECK(slurp(ws / "v1.txt.emb.txt") == slurp(ws / "v2.txt.emb.txt"));
  CHECK(std::count(reports[0].begin(), reports[0].end(), '\n') > 6 * 2);
  CHECK(reports[0].rfind("mode: original-original\nfar_target: 0.05\n", 0) == 0);
  CHECK(reports[0].find("mode: watermarked-watermarked\nfar_target: 0.5\n") != std::string::npos);

  for (const char* out : {"v3.txt", "v4.txt"})
    REQUIRE(run({"verify", "--config", ws / "verify.cfg", "--embeddings", ws / "v1.txt.emb.txt", ws / out}).code ==
            0);
  CHECK(slurp(ws / "v3.txt") == slurp(ws / "v4.txt"));
  const std::string reread = slurp(ws / "v3.txt");
  CHECK(std::count(reports[0].begin(), reports[0].end(), '\n') == std::count(reread.begin(), reread.end(), '\n'));
}
