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
#include "wmark/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>

#include "wmark/config.hpp"
#include "wmark/embedder.hpp"
#include "wmark/pipeline.hpp"
#include "wmark/synthetic.hpp"
#include "wmark/transforms.hpp"

namespace wmark {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

struct MessageSource {
  std::string bits;
  std::string bitmap;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key=value settings file");
  sub->add_option("--seed", c.seed, "overrides the config seed");
}

void add_message(CLI::App* sub, MessageSource& m) {
  auto* bits = sub->add_option("--message", m.bits, "message as a string of 0/1 characters");
  auto* bmp = sub->add_option("--bitmap", m.bitmap, "signature bitmap file (\"H W\" then H rows of 0/1)");
  bits->excludes(bmp);
}

KeyValueConfig read_config(const Common& c, const std::set<std::string, std::less<>>& known) {
  KeyValueConfig kv;
  if (!c.config.empty()) {
    if (!fs::is_regular_file(c.config)) throw UsageError("config file not found: " + c.config);
    try {
      kv = KeyValueConfig::load(c.config);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  try {
    kv.require_known(known);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return kv;
}

std::uint64_t resolve_seed(const Common& c, const KeyValueConfig& kv) {
  if (c.seed) return *c.seed;
  try {
    return kv.get_u64("seed", 0);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

// Runs `fn`, reporting configuration mistakes as usage errors.
template <class Fn>
auto interpret(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

Message resolve_message(const MessageSource& m, std::size_t length, std::uint64_t seed, std::ostream& err) {
  Message msg;
  if (!m.bits.empty()) {
    msg = interpret([&] { return Message::parse(m.bits); });
  } else if (!m.bitmap.empty()) {
    if (!fs::is_regular_file(m.bitmap)) throw UsageError("bitmap file not found: " + m.bitmap);
    msg = bitmap_to_message(load_bitmap(m.bitmap));
  } else {
    msg = random_message(seed, static_cast<int>(length));
    err << "message (random, seed " << seed << "): " << msg.to_string() << '\n';
  }
  if (msg.size() != length)
    throw UsageError("message has " + std::to_string(msg.size()) + " bits, model expects " +
                     std::to_string(length));
  return msg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

LoadedImages read_manifest_images(const std::string& path, std::ostream& err) {
  require_file(path, "manifest");
  LoadedImages li = load_images(load_manifest(path));
  for (const auto& f : li.failures) err << "warning: skipped " << f << '\n';
  return li;
}

// ---- subcommands ------------------------------------------------------------

struct TrainWm {
  Common common;
  std::string out, manifest, history;
};

int run_train_wm(const TrainWm& a, std::ostream& err) {
  auto keys = train_config_keys();
  keys.insert("train_images");
  const KeyValueConfig kv = read_config(a.common, keys);
  TrainConfig cfg = interpret([&] { return train_config_from(kv); });
  cfg.seed = resolve_seed(a.common, kv);
  interpret([&] { cfg.validate(); return 0; });
  const auto count = interpret([&] { return kv.get_int("train_images", 256); });
  if (count < 1) throw UsageError("train_images must be >= 1");

  std::vector<Image> images;
  if (!a.manifest.empty()) {
    images = read_manifest_images(a.manifest, err).images;
  } else {
    const auto side = static_cast<std::size_t>(cfg.image_size);
    images = synth::textures(derive_seed(cfg.seed, 100), static_cast<std::size_t>(count),
                             static_cast<std::size_t>(cfg.model.image_channels), side, side);
  }
  auto log = [&](const HistoryRow& r) {
    if (r.step % 100 == 0 || r.step + 1 == cfg.steps)
      err << "step " << r.step << " recon " << r.recon_loss << " decode " << r.decode_loss << " acc "
          << r.bit_acc << " psnr " << r.psnr << '\n';
  };
  TrainResult res = train_watermark(cfg, images, log);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  save_model(res.model, a.out);
  if (!a.history.empty()) write_text(a.history, format_history_csv(res.history));
  return kExitOk;
}

struct TrainEmb {
  Common common;
  std::string manifest, out, history;
};

int run_train_embedder(const TrainEmb& a, std::ostream& err) {
  const KeyValueConfig kv = read_config(
      a.common, {"embedding_dim", "base_channels", "input_size", "image_channels", "epochs", "batch_size",
                 "lr", "seed", "resize"});
  EmbedderConfig cfg;
  EmbedderTrainConfig tc;
  bool resize = false;
  interpret([&] {
    cfg.embedding_dim = static_cast<int>(kv.get_int("embedding_dim", cfg.embedding_dim));
    cfg.base_channels = static_cast<int>(kv.get_int("base_channels", cfg.base_channels));
    cfg.input_size = static_cast<int>(kv.get_int("input_size", cfg.input_size));
    cfg.image_channels = static_cast<int>(kv.get_int("image_channels", cfg.image_channels));
    tc.epochs = static_cast<int>(kv.get_int("epochs", tc.epochs));
    tc.batch_size = static_cast<int>(kv.get_int("batch_size", tc.batch_size));
    tc.lr = kv.get_double("lr", tc.lr);
    resize = kv.get_bool("resize", false);
    return 0;
  });
  tc.seed = resolve_seed(a.common, kv);

  LoadedImages li = read_manifest_images(a.manifest, err);
  std::map<std::string, std::size_t> index;
  std::vector<std::size_t> labels;
  for (const auto& id : li.identities) {
    auto [it, fresh] = index.try_emplace(id, index.size());
    labels.push_back(it->second);
  }
  cfg.classes = static_cast<int>(index.size());
  if (resize) {
    const auto s = static_cast<std::size_t>(cfg.input_size);
    for (auto& img : li.images) img = resize_to(img, s, s);
  }
  EmbedderTrainResult res = interpret([&] { return train_embedder(li.images, labels, cfg, tc); });
  for (std::size_t e = 0; e < res.loss_history.size(); ++e)
    err << "epoch " << e << " loss " << res.loss_history[e] << '\n';
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  save_embedder(res.model, a.out);
  if (!a.history.empty()) {
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < res.loss_history.size(); ++e)
      csv += std::to_string(e) + ',' + format_number(res.loss_history[e]) + '\n';
    write_text(a.history, csv);
  }
  return kExitOk;
}

struct Embed {
  Common common;
  MessageSource msg;
  std::string model, input, output;
};

int run_embed(const Embed& a, std::ostream& err) {
  const KeyValueConfig kv = read_config(a.common, {"seed"});
  require_file(a.model, "model");
  require_file(a.input, "image");
  const WatermarkModel model = load_model(a.model);
  const Message msg = resolve_message(a.msg, model.message_length(), resolve_seed(a.common, kv), err);
  const Image img = load_pnm(a.input);
  const Image wm = model.encode(img, msg);
  if (fs::path(a.output).has_parent_path()) fs::create_directories(fs::path(a.output).parent_path());
  save_pnm(wm, a.output);
  err << "psnr " << psnr(img, load_pnm(a.output)) << " dB\n";
  return kExitOk;
}

struct Extract {
  Common common;
  std::string model, image;
};

int run_extract(const Extract& a, std::ostream& out) {
  read_config(a.common, {"seed"});
  require_file(a.model, "model");
  require_file(a.image, "image");
  const WatermarkModel model = load_model(a.model);
  out << model.extract(load_pnm(a.image)).to_string() << '\n';
  return kExitOk;
}

struct Dataset {
  Common common;
  MessageSource msg;
  std::string model, manifest, out_dir;
};

int run_watermark_dataset(const Dataset& a, std::ostream& err) {
  const KeyValueConfig kv = read_config(a.common, {"seed"});
  require_file(a.model, "model");
  require_file(a.manifest, "manifest");
  const WatermarkModel model = load_model(a.model);
  const Message msg = resolve_message(a.msg, model.message_length(), resolve_seed(a.common, kv), err);
  const DatasetManifest manifest = load_manifest(a.manifest);
  const DatasetResult res = watermark_dataset(model, manifest, msg, a.out_dir);
  save_manifest(res.manifest, fs::path(a.out_dir) / "manifest.csv");
  write_text(fs::path(a.out_dir) / "message.txt", msg.to_string() + '\n');
  for (const auto& f : res.failures) err << "warning: skipped " << f << '\n';
  err << res.manifest.entries.size() << " images watermarked, mean psnr " << res.mean_psnr << " dB\n";
  return kExitOk;
}

struct Sweep {
  Common common;
  MessageSource msg;
  std::string model, manifest, out;
};

int run_sweep_cmd(const Sweep& a, std::ostream& err) {
  const KeyValueConfig kv = read_config(
      a.common, {"seed", "repetitions", "kinds", "crop_grid", "resize_grid", "brightness_grid",
                 "contrast_grid", "jpeg_grid"});
  const std::uint64_t seed = resolve_seed(a.common, kv);
  SweepSpec spec = interpret([&] {
    SweepSpec s = SweepSpec::standard();
    s.seed = seed;
    s.repetitions = static_cast<int>(kv.get_int("repetitions", 1));
    std::set<std::string, std::less<>> wanted;
    if (kv.has("kinds")) {
      std::string list = kv.get_string("kinds", "");
      std::size_t pos = 0;
      while (pos <= list.size()) {
        std::size_t comma = list.find(',', pos);
        if (comma == std::string::npos) comma = list.size();
        std::string item = list.substr(pos, comma - pos);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) wanted.insert(std::string(kind_name(parse_kind(item))));
        pos = comma + 1;
      }
    }
    std::vector<std::pair<TransformKind, std::vector<double>>> grids;
    for (auto& [kind, grid] : s.grids) {
      const std::string name(kind_name(kind));
      if (!wanted.empty() && !wanted.count(name)) continue;
      grids.emplace_back(kind, kind == TransformKind::kIdentity ? grid : kv.get_list(name + "_grid", grid));
    }
    s.grids = std::move(grids);
    s.validate();
    return s;
  });
  require_file(a.model, "model");
  const WatermarkModel model = load_model(a.model);
  const Message msg = resolve_message(a.msg, model.message_length(), seed, err);
  const LoadedImages li = read_manifest_images(a.manifest, err);
  const std::vector<SweepRow> rows = run_sweep(model, li.images, msg, spec);
  for (const auto& r : rows)
    if (!r.error.empty()) err << "cell " << kind_name(r.kind) << ' ' << r.factor << " failed: " << r.error << '\n';
  write_text(a.out, format_sweep_csv(rows));
  return kExitOk;
}

struct Verify {
  Common common;
  std::string embeddings, embedder, original, watermarked, save_embeddings, report;
};

int run_verify(const Verify& a, std::ostream& err) {
  const KeyValueConfig kv = read_config(
      a.common, {"seed", "fars", "modes", "baseline", "max_imposters", "pairs_per_id", "resize"});
  VerificationSpec spec;
  bool resize = false;
  interpret([&] {
    spec.fars = kv.get_list("fars", spec.fars);
    for (double f : spec.fars)
      if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("fars entries must lie in (0, 1]");
    if (kv.has("modes")) {
      spec.modes.clear();
      std::string list = kv.get_string("modes", "");
      std::size_t pos = 0;
      while (pos <= list.size()) {
        std::size_t comma = list.find(',', pos);
        if (comma == std::string::npos) comma = list.size();
        std::string item = list.substr(pos, comma - pos);
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) spec.modes.push_back(parse_mode(item));
        pos = comma + 1;
      }
    }
    spec.baseline = kv.get_bool("baseline", spec.baseline);
    const long long mi = kv.get_int("max_imposters", static_cast<long long>(spec.pairing.max_imposters));
    const long long pp = kv.get_int("pairs_per_id", 0);
    if (mi < 1 || pp < 0) throw std::invalid_argument("max_imposters must be >= 1 and pairs_per_id >= 0");
    spec.pairing.max_imposters = static_cast<std::size_t>(mi);
    spec.pairing.pairs_per_id = static_cast<std::size_t>(pp);
    resize = kv.get_bool("resize", false);
    return 0;
  });
  spec.pairing.seed = resolve_seed(a.common, kv);

  std::vector<Embedding> embeddings;
  if (!a.embeddings.empty()) {
    if (!a.embedder.empty() || !a.original.empty() || !a.watermarked.empty())
      throw UsageError("--embeddings cannot be combined with --embedder/--original/--watermarked");
    require_file(a.embeddings, "embedding file");
    embeddings = load_embeddings(a.embeddings);
  } else {
    if (a.embedder.empty() || a.original.empty() || a.watermarked.empty())
      throw UsageError("verify needs --embeddings, or --embedder with --original and --watermarked");
    require_file(a.embedder, "embedder");
    const EmbedderModel model = load_embedder(a.embedder);
    for (const auto& [path, tag] : {std::pair{a.original, SourceTag::kOriginal},
                                    std::pair{a.watermarked, SourceTag::kWatermarked}}) {
      const LoadedImages li = read_manifest_images(path, err);
      auto part = embed_images(model, li.images, li.identities, tag, resize);
      embeddings.insert(embeddings.end(), part.begin(), part.end());
    }
    if (!a.save_embeddings.empty()) save_embeddings(embeddings, a.save_embeddings);
  }
  const std::vector<VerificationReport> reports = run_verification(embeddings, spec);
  for (const auto& r : reports)
    if (!r.error.empty()) err << mode_name(r.mode) << " @ FAR " << r.far_target << ": " << r.error << '\n';
  write_text(a.report, format_reports(reports));
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Invisible watermarking for face-recognition datasets"};
  app.name(args.empty() ? "wmark" : fs::path(args.front()).filename().string());
  app.require_subcommand(1);

  TrainWm train_wm;
  auto* s_train = app.add_subcommand("train-wm", "train a watermark encoder/decoder pair");
  add_common(s_train, train_wm.common);
  s_train->add_option("out", train_wm.out, "output weight file (WMF1)")->required();
  s_train->add_option("manifest", train_wm.manifest, "training images; synthetic textures when omitted");
  s_train->add_option("--history", train_wm.history, "per-step metrics CSV");

  TrainEmb train_emb;
  auto* s_emb = app.add_subcommand("train-embedder", "train the toy face embedder");
  add_common(s_emb, train_emb.common);
  s_emb->add_option("manifest", train_emb.manifest, "labelled training images")->required();
  s_emb->add_option("out", train_emb.out, "output weight file (EMB1)")->required();
  s_emb->add_option("--history", train_emb.history, "per-epoch loss CSV");

  Embed embed;
  auto* s_embed = app.add_subcommand("embed", "watermark one image");
  add_common(s_embed, embed.common);
  add_message(s_embed, embed.msg);
  s_embed->add_option("--model", embed.model, "weight file")->required();
  s_embed->add_option("input", embed.input, "input PPM/PGM")->required();
  s_embed->add_option("output", embed.output, "output PPM/PGM")->required();

  Extract extract;
  auto* s_extract = app.add_subcommand("extract", "print the message decoded from an image");
  add_common(s_extract, extract.common);
  s_extract->add_option("--model", extract.model, "weight file")->required();
  s_extract->add_option("image", extract.image, "input PPM/PGM")->required();

  Dataset dataset;
  auto* s_dataset = app.add_subcommand("watermark-dataset", "watermark every image of a manifest");
  add_common(s_dataset, dataset.common);
  add_message(s_dataset, dataset.msg);
  s_dataset->add_option("--model", dataset.model, "weight file")->required();
  s_dataset->add_option("manifest", dataset.manifest, "input manifest")->required();
  s_dataset->add_option("out_dir", dataset.out_dir, "output directory")->required();

  Sweep sweep;
  auto* s_sweep = app.add_subcommand("sweep", "bit accuracy under a grid of transforms");
  add_common(s_sweep, sweep.common);
  add_message(s_sweep, sweep.msg);
  s_sweep->add_option("--model", sweep.model, "weight file")->required();
  s_sweep->add_option("manifest", sweep.manifest, "images to test")->required();
  s_sweep->add_option("out", sweep.out, "output CSV")->required();

  Verify verify;
  auto* s_verify = app.add_subcommand("verify", "TAR@FAR, EER and t-tests for the pairing modes");
  add_common(s_verify, verify.common);
  s_verify->add_option("--embeddings", verify.embeddings, "embedding file");
  s_verify->add_option("--embedder", verify.embedder, "embedder weight file (EMB1)");
  s_verify->add_option("--original", verify.original, "manifest of original images");
  s_verify->add_option("--watermarked", verify.watermarked, "manifest of watermarked images");
  s_verify->add_option("--save-embeddings", verify.save_embeddings, "write computed embeddings here");
  s_verify->add_option("report", verify.report, "output report file")->required();

  std::vector<const char*> argv;
  argv.push_back(args.empty() ? "wmark" : args.front().c_str());
  for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, err, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, err, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    if (s_train->parsed()) return run_train_wm(train_wm, err);
    if (s_emb->parsed()) return run_train_embedder(train_emb, err);
    if (s_embed->parsed()) return run_embed(embed, err);
    if (s_extract->parsed()) return run_extract(extract, out);
    if (s_dataset->parsed()) return run_watermark_dataset(dataset, err);
    if (s_sweep->parsed()) return run_sweep_cmd(sweep, err);
    if (s_verify->parsed()) return run_verify(verify, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << app.get_subcommands().front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace wmark
