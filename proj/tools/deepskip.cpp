// Copyright 2026 The deepskip Authors
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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "deepskip/audio.hpp"
#include "deepskip/corpus.hpp"
#include "deepskip/discretize.hpp"
#include "deepskip/eval.hpp"
#include "deepskip/log.hpp"
#include "deepskip/models.hpp"
#include "deepskip/nn/checkpoint.hpp"
#include "deepskip/sgns.hpp"
#include "deepskip/synth.hpp"

namespace fs = std::filesystem;
using namespace deepskip;

namespace {

constexpr int kMetaVersion = 1;

// Resolved configuration of the running command, shared by every sidecar.
struct RunInfo {
  std::string command;
  std::string config;
  std::uint64_t seed = 0;
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// <artifact>.meta.json next to every file the tool writes.
void write_meta(const std::string& artifact, const RunInfo& run, const std::string& format) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(run.config)));
  nlohmann::ordered_json j;
  j["format"] = format;
  j["format_version"] = kMetaVersion;
  j["artifact"] = fs::path(artifact).filename().string();
  j["command"] = run.command;
  j["config_hash"] = hash;
  j["seed"] = run.seed;
  j["config"] = run.config;
  std::ofstream out(artifact + ".meta.json");
  if (!out) throw DataError("io", "cannot write " + artifact + ".meta.json");
  out << j.dump(2) << '\n';
}

void ensure_parent(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw DataError("missing_file", std::string(what) + " not found: " + path);
}

std::vector<std::string> list_features(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("missing_file", "feature directory not found: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".afv") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no_features", "no .afv files in " + dir);
  return files;
}

std::vector<FrameSequence> read_features(const std::vector<std::string>& files) {
  std::vector<FrameSequence> out;
  out.reserve(files.size());
  std::optional<int> dim;
  for (const auto& f : files) {
    out.push_back(read_feature_file(f, dim));
    dim = out.back().dim();
  }
  return out;
}

// ---------------------------------------------------------------- options

struct BaselineArgs {
  std::string corpus, out, vocab_out;
  int min_count = 5;
  BaselineConfig cfg;
};

struct MfccArgs {
  std::string manifest, out_dir;
  MfccConfig cfg;
};

struct NormalizeArgs {
  std::string feature_dir, stats_out, out_dir;
  double eps_var = 1e-8;
};

struct ClusterArgs {
  std::string feature_dir, out, stats;
  KMeansConfig cfg;
};

struct EncodeArgs {
  std::string manifest, codebook, out, stats, feature_dir;
};

struct TrainArgs {
  std::string mode = "end2end";
  std::string input = "chars";
  std::string corpus, units, codebook, manifest, stats, feature_dir;
  std::string baseline, pairs, out, metrics, checkpoint;
  int min_count = 5;
  int k_units = 100;
  int n_pairs = 40000;
  ModelConfig cfg;
};

struct EvalArgs {
  std::string embeddings, pairs, out;
  int epoch = 0;
};

struct NeighborArgs {
  std::string embeddings, word, out;
  int k = 10;
};

struct PairArgs {
  std::string baseline, vocab, out;
  int n = 40000;
  std::uint64_t seed = 1;
};

struct ConvertArgs {
  std::string input, out;
};

struct SynthTextArgs {
  std::string out;
  TextSynthConfig cfg;
};

struct SynthSpeechArgs {
  std::string corpus, out_dir;
  SpeechSynthConfig cfg;
};

// ---------------------------------------------------------------- commands

void run_train_baseline(const BaselineArgs& a, const RunInfo& run) {
  require_file(a.corpus, "corpus");
  a.cfg.validate();
  const auto sentences = read_corpus(a.corpus);
  const auto vocab = Vocabulary::build(sentences, a.min_count);
  log().info("vocabulary: {} types from {} sentences", vocab.size(), sentences.size());
  auto res = train_baseline(sentences, vocab, a.cfg);
  ensure_parent(a.out);
  save_word_vectors(export_center_vectors(res.table, vocab), a.out);
  write_meta(a.out, run, "word_vectors");
  const std::string vpath = a.vocab_out.empty() ? a.out + ".vocab" : a.vocab_out;
  vocab.save(vpath);
  write_meta(vpath, run, "vocabulary");
}

void run_extract_mfcc(const MfccArgs& a, const RunInfo& run) {
  require_file(a.manifest, "manifest");
  const auto manifest = read_manifest(a.manifest);
  fs::create_directories(a.out_dir);
  for (const auto& e : manifest) {
    const auto wav = resolve_path(a.manifest, e.audio_path);
    require_file(wav, ("audio for utterance " + e.utt_id).c_str());
    const FrameSequence fs = compute_mfcc(read_wav(wav), a.cfg);
    const auto path = (fs::path(a.out_dir) / (e.utt_id + ".afv")).string();
    write_feature_file(path, fs);
    write_meta(path, run, "AFV1");
  }
  log().info("wrote MFCC features for {} utterances to {}", manifest.size(), a.out_dir);
}

void run_normalize(const NormalizeArgs& a, const RunInfo& run) {
  const auto files = list_features(a.feature_dir);
  auto feats = read_features(files);
  const NormStats st = normalize_features(feats, a.eps_var);
  ensure_parent(a.stats_out);
  st.save(a.stats_out);
  write_meta(a.stats_out, run, "norm_stats");
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto path = (fs::path(a.out_dir) / fs::path(files[i]).filename()).string();
      write_feature_file(path, feats[i]);
      write_meta(path, run, "AFV1");
    }
  }
  log().info("normalization statistics over {} files written to {}", files.size(), a.stats_out);
}

void run_cluster(const ClusterArgs& a, const RunInfo& run) {
  a.cfg.validate();
  auto feats = read_features(list_features(a.feature_dir));
  if (!a.stats.empty()) {
    require_file(a.stats, "normalization statistics");
    const NormStats st = NormStats::load(a.stats);
    for (auto& f : feats) apply_norm(f, st);
  }
  long total = 0;
  for (const auto& f : feats) total += f.num_frames();
  MatrixXfR frames(total, feats.front().dim());
  long row = 0;
  for (const auto& f : feats) {
    frames.middleRows(row, f.num_frames()) = f.frames;
    row += f.num_frames();
  }
  auto res = kmeans_fit(frames, a.cfg);
  res.codebook.source = feats.front().source;
  ensure_parent(a.out);
  write_codebook(a.out, res.codebook);
  write_meta(a.out, run, "KMB1");
  log().info("codebook K={} D={} inertia {:.6g} after {} iterations", res.codebook.k(), res.codebook.dim(),
             res.codebook.inertia, res.iterations);
}

void run_encode_units(const EncodeArgs& a, const RunInfo& run) {
  require_file(a.manifest, "manifest");
  require_file(a.codebook, "codebook");
  const auto manifest = read_manifest(a.manifest);
  const Codebook cb = read_codebook(a.codebook);
  EncodeOptions opts;
  opts.feature_dir = a.feature_dir;
  if (!a.stats.empty()) {
    require_file(a.stats, "normalization statistics");
    opts.norm = NormStats::load(a.stats);
  }
  const UnitStore store = encode_corpus(manifest, a.manifest, cb, opts);
  ensure_parent(a.out);
  save_unit_store(store.records, a.out);
  write_meta(a.out, run, "unit_store");
}

SkipgramCorpus load_training_corpus(const TrainArgs& a) {
  switch (a.cfg.input) {
    case InputMode::kChars: {
      if (a.corpus.empty()) throw ConfigError("corpus", "--corpus is required for character input");
      require_file(a.corpus, "corpus");
      const auto sentences = read_corpus(a.corpus);
      return make_char_corpus(sentences, Vocabulary::build(sentences, a.min_count));
    }
    case InputMode::kUnits: {
      if (a.units.empty()) throw ConfigError("units", "--units is required for unit input");
      require_file(a.units, "unit store");
      int k = a.k_units;
      if (!a.codebook.empty()) {
        require_file(a.codebook, "codebook");
        k = read_codebook(a.codebook).k();
      }
      return make_unit_corpus(load_unit_store(a.units), k, a.min_count);
    }
    case InputMode::kFrames: {
      if (a.manifest.empty()) throw ConfigError("manifest", "--manifest is required for frame input");
      require_file(a.manifest, "manifest");
      std::optional<NormStats> st;
      if (!a.stats.empty()) {
        require_file(a.stats, "normalization statistics");
        st = NormStats::load(a.stats);
      }
      return make_frame_corpus(read_manifest(a.manifest), a.manifest, st, a.min_count, a.feature_dir);
    }
  }
  throw ConfigError("input", "unknown input mode");
}

void run_train(TrainArgs a, const RunInfo& run) {
  a.cfg.input = parse_input_mode(a.input);
  if (a.mode != "end2end" && a.mode != "two-stage") throw ConfigError("mode", "mode must be end2end or two-stage");
  a.cfg.validate();
  const SkipgramCorpus corpus = load_training_corpus(a);
  log().info("training corpus: {} words, {} items, {} utterances", corpus.vocab.size(), corpus.lexicon.size(),
             corpus.utterances.size());

  std::vector<EvalPair> pairs;
  if (!a.pairs.empty()) {
    require_file(a.pairs, "evaluation pairs");
    pairs = load_eval_pairs(a.pairs);
  } else if (!a.baseline.empty()) {
    require_file(a.baseline, "baseline vectors");
    Rng rng = make_rng(a.cfg.seed, "pairs");
    pairs = build_eval_pairs(corpus.vocab, load_word_vectors(a.baseline), a.n_pairs, rng);
  }

  const std::string metrics = a.metrics.empty() ? a.out + ".metrics.csv" : a.metrics;
  ensure_parent(a.out);
  ensure_parent(metrics);
  std::vector<EpochMetrics> history;
  TrainOptions opts;
  opts.pairs = pairs;
  opts.on_epoch = [&](const EpochMetrics& m, const WordVectors&) {
    history.push_back(m);
    write_metrics_csv(history, metrics);
  };

  TrainResult res;
  if (a.mode == "two-stage") {
    const AutoencoderResult ae = train_autoencoder(corpus, a.cfg);
    const std::string stage1 = a.out + ".stage1";
    save_word_vectors(ae.type_embeddings, stage1);
    write_meta(stage1, run, "word_vectors");
    res = train_two_stage(corpus, ae.item_embeddings, a.cfg, opts);
  } else if (a.cfg.input == InputMode::kFrames) {
    res = train_continuous_baseline(corpus, a.cfg, opts);
  } else {
    res = train_end_to_end(corpus, a.cfg, opts);
  }
  save_word_vectors(res.embeddings, a.out);
  write_meta(a.out, run, "word_vectors");
  write_meta(metrics, run, "metrics_csv");
  if (res.net) {
    const std::string ckpt = a.checkpoint.empty() ? a.out + ".ckpt" : a.checkpoint;
    ensure_parent(ckpt);
    nn::save_checkpoint(nn::make_checkpoint(a.cfg.to_json(), a.cfg.epochs, res.net->params(), nullptr), ckpt);
    write_meta(ckpt, run, "CKP1");
  }
}

void run_eval(const EvalArgs& a, const RunInfo& run) {
  require_file(a.embeddings, "embeddings");
  require_file(a.pairs, "evaluation pairs");
  const auto pairs = load_eval_pairs(a.pairs);
  const auto rep = correlation_report(load_word_vectors(a.embeddings), pairs, a.epoch);
  nlohmann::ordered_json j;
  j["epoch"] = rep.epoch;
  j["r_cosine"] = rep.r_cosine;
  j["r_edit"] = rep.r_edit;
  j["n_pairs"] = rep.n_pairs;
  j["n_excluded"] = rep.n_excluded;
  ensure_parent(a.out);
  std::ofstream out(a.out);
  if (!out) throw DataError("io", "cannot write " + a.out);
  out << j.dump(2) << '\n';
  out.close();
  write_meta(a.out, run, "correlation_report");
  log().info("r_cosine {:.4f} r_edit {:.4f} over {} pairs ({} excluded)", rep.r_cosine, rep.r_edit, rep.n_pairs,
             rep.n_excluded);
}

void run_neighbors(const NeighborArgs& a, const RunInfo& run) {
  require_file(a.embeddings, "embeddings");
  if (a.k < 1) throw ConfigError("k", "k must be >= 1");
  const auto table = nearest_neighbors(a.word, load_word_vectors(a.embeddings), a.k);
  if (a.out.empty()) {
    print_neighbor_table(std::cout, table);
    return;
  }
  ensure_parent(a.out);
  std::ofstream out(a.out);
  if (!out) throw DataError("io", "cannot write " + a.out);
  print_neighbor_records(out, table);
  out.close();
  write_meta(a.out, run, "neighbors");
}

void run_make_pairs(const PairArgs& a, const RunInfo& run) {
  require_file(a.baseline, "baseline vectors");
  require_file(a.vocab, "vocabulary");
  if (a.n < 1) throw ConfigError("n", "n must be >= 1");
  Rng rng = make_rng(a.seed, "pairs");
  const auto pairs = build_eval_pairs(Vocabulary::load(a.vocab), load_word_vectors(a.baseline), a.n, rng);
  ensure_parent(a.out);
  save_eval_pairs(pairs, a.out);
  write_meta(a.out, run, "eval_pairs");
}

void run_convert_alignments(const ConvertArgs& a, const RunInfo& run) {
  require_file(a.input, "alignment file");
  std::ifstream in(a.input);
  std::vector<Alignment> als;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    als.push_back(parse_librispeech_alignment(line));
  }
  ensure_parent(a.out);
  save_alignments(als, a.out);
  write_meta(a.out, run, "alignments");
}

void run_synth_text(const SynthTextArgs& a, const RunInfo& run) {
  if (a.cfg.n_sentences < 1) throw ConfigError("sentences", "sentences must be >= 1");
  if (a.cfg.off_topic < 0.0 || a.cfg.off_topic > 1.0) throw ConfigError("off-topic", "off-topic must be in [0, 1]");
  const auto sentences = make_narrative_corpus(a.cfg);
  ensure_parent(a.out);
  std::ofstream out(a.out);
  if (!out) throw DataError("io", "cannot write " + a.out);
  for (const auto& s : sentences) {
    out << s.utt_id << '\t';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) out << (i ? " " : "") << s.tokens[i];
    out << '\n';
  }
  out.close();
  write_meta(a.out, run, "corpus");
}

void run_synth_speech(const SynthSpeechArgs& a, const RunInfo& run) {
  require_file(a.corpus, "corpus");
  if (a.cfg.min_seconds <= 0.0) throw ConfigError("min-seconds", "min-seconds must be positive");
  const auto utts = synthesize_speech(read_corpus(a.corpus), a.cfg);
  const auto manifest = write_speech_dataset(utts, a.out_dir);
  write_meta(manifest, run, "manifest");
  double seconds = 0.0;
  for (const auto& u : utts) seconds += u.wave.duration();
  log().info("synthesised {} utterances, {:.1f} s of audio, manifest {}", utts.size(), seconds, manifest);
}

int fail(ErrorKind kind, const std::string& tag, const std::string& message) {
  const char* name = kind == ErrorKind::kConfig ? "config" : kind == ErrorKind::kData ? "data" : "numeric";
  nlohmann::ordered_json j;
  j["error"] = name;
  j["tag"] = tag;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
  return static_cast<int>(kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional word embeddings from character and acoustic-unit sequences."};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "TOML config file with one [section] per subcommand; flags override it");
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->capture_default_str()
      ->configurable(false);

  BaselineArgs base;
  auto* c_base = app.add_subcommand("train-baseline", "train lookup-table skip-gram vectors on a text corpus");
  c_base->add_option("--corpus", base.corpus, "text corpus, one sentence per line")->required();
  c_base->add_option("--out", base.out, "output word vectors")->required();
  c_base->add_option("--vocab-out", base.vocab_out, "vocabulary file (default <out>.vocab)");
  c_base->add_option("--min-count", base.min_count, "minimum word frequency")->capture_default_str();
  c_base->add_option("--dim", base.cfg.dim, "vector dimension")->capture_default_str();
  c_base->add_option("--window", base.cfg.window, "context window radius")->capture_default_str();
  c_base->add_option("--negatives", base.cfg.k_neg, "negatives per positive pair")->capture_default_str();
  c_base->add_option("--epochs", base.cfg.epochs, "passes over the corpus")->capture_default_str();
  c_base->add_option("--lr", base.cfg.lr, "initial learning rate, decayed linearly")->capture_default_str();
  c_base->add_option("--neg-power", base.cfg.neg_power, "exponent on unigram counts for negatives")
      ->capture_default_str();
  c_base->add_option("--seed", base.cfg.seed, "random seed")->capture_default_str();

  MfccArgs mfcc;
  auto* c_mfcc = app.add_subcommand("extract-mfcc", "compute 39-dim MFCC features for every manifest utterance");
  c_mfcc->add_option("--manifest", mfcc.manifest, "manifest.jsonl")->required();
  c_mfcc->add_option("--out-dir", mfcc.out_dir, "directory for <utt_id>.afv files")->required();
  c_mfcc->add_option("--n-fft", mfcc.cfg.n_fft, "FFT size")->capture_default_str();
  c_mfcc->add_option("--win-len", mfcc.cfg.win_len, "window length in seconds")->capture_default_str();
  c_mfcc->add_option("--hop", mfcc.cfg.hop, "hop in seconds")->capture_default_str();
  c_mfcc->add_option("--n-mels", mfcc.cfg.n_mels, "mel filters")->capture_default_str();
  c_mfcc->add_option("--n-ceps", mfcc.cfg.n_ceps, "cepstral coefficients kept")->capture_default_str();
  c_mfcc->add_option("--preemphasis", mfcc.cfg.preemphasis, "pre-emphasis coefficient")->capture_default_str();
  c_mfcc->add_option("--delta-window", mfcc.cfg.delta_window, "delta regression radius")->capture_default_str();

  NormalizeArgs norm;
  auto* c_norm = app.add_subcommand("normalize", "per-dimension mean and variance normalization statistics");
  c_norm->add_option("--feature-dir", norm.feature_dir, "directory of .afv files")->required();
  c_norm->add_option("--stats-out", norm.stats_out, "output statistics (JSON)")->required();
  c_norm->add_option("--out-dir", norm.out_dir, "also write normalized features here");
  c_norm->add_option("--eps-var", norm.eps_var, "standard deviation floor")->capture_default_str();

  ClusterArgs clus;
  auto* c_clus = app.add_subcommand("cluster", "k-means codebook over all feature frames");
  c_clus->add_option("--feature-dir", clus.feature_dir, "directory of .afv files")->required();
  c_clus->add_option("--out", clus.out, "output codebook (KMB1)")->required();
  c_clus->add_option("--stats", clus.stats, "normalization statistics applied before clustering");
  c_clus->add_option("--k", clus.cfg.k, "number of clusters")->capture_default_str();
  c_clus->add_option("--max-iters", clus.cfg.max_iters, "Lloyd iterations per restart")->capture_default_str();
  c_clus->add_option("--tol", clus.cfg.tol, "relative inertia improvement to stop at")->capture_default_str();
  c_clus->add_option("--n-init", clus.cfg.n_init, "k-means++ restarts")->capture_default_str();
  c_clus->add_option("--max-frames", clus.cfg.max_frames, "subsample above this many frames (<= 0: all)")
      ->capture_default_str();
  c_clus->add_option("--seed", clus.cfg.seed, "random seed")->capture_default_str();

  EncodeArgs enc;
  auto* c_enc = app.add_subcommand("encode-units", "turn aligned words into deduplicated unit sequences");
  c_enc->add_option("--manifest", enc.manifest, "manifest.jsonl")->required();
  c_enc->add_option("--codebook", enc.codebook, "codebook (KMB1)")->required();
  c_enc->add_option("--out", enc.out, "output unit store")->required();
  c_enc->add_option("--stats", enc.stats, "normalization statistics applied before assignment");
  c_enc->add_option("--feature-dir", enc.feature_dir, "read <utt_id>.afv from here instead of the manifest paths");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "train sequence-model word embeddings");
  c_tr->add_option("--mode", tr.mode, "end2end or two-stage")
      ->check(CLI::IsMember({"end2end", "two-stage"}))
      ->capture_default_str();
  c_tr->add_option("--input", tr.input, "chars, units or frames")
      ->check(CLI::IsMember({"chars", "units", "frames"}))
      ->capture_default_str();
  c_tr->add_option("--s", tr.cfg.s, "scale: GRU layers, linear layers and hidden/50")->capture_default_str();
  c_tr->add_option("--corpus", tr.corpus, "text corpus (chars)");
  c_tr->add_option("--units", tr.units, "unit store (units)");
  c_tr->add_option("--codebook", tr.codebook, "codebook fixing the unit alphabet (units)");
  c_tr->add_option("--k", tr.k_units, "unit alphabet size when no codebook is given")->capture_default_str();
  c_tr->add_option("--manifest", tr.manifest, "manifest.jsonl (frames)");
  c_tr->add_option("--stats", tr.stats, "normalization statistics (frames)");
  c_tr->add_option("--feature-dir", tr.feature_dir, "feature directory override (frames)");
  c_tr->add_option("--baseline", tr.baseline, "baseline vectors; builds evaluation pairs when --pairs is absent");
  c_tr->add_option("--pairs", tr.pairs, "evaluation pairs for per-epoch correlation");
  c_tr->add_option("--n-pairs", tr.n_pairs, "pairs built from --baseline")->capture_default_str();
  c_tr->add_option("--out", tr.out, "output word vectors")->required();
  c_tr->add_option("--metrics", tr.metrics, "per-epoch CSV (default <out>.metrics.csv)");
  c_tr->add_option("--checkpoint", tr.checkpoint, "model checkpoint (default <out>.ckpt)");
  c_tr->add_option("--min-count", tr.min_count, "minimum word frequency")->capture_default_str();
  c_tr->add_option("--window", tr.cfg.window, "context window radius")->capture_default_str();
  c_tr->add_option("--negatives", tr.cfg.k_neg, "negatives per positive pair")->capture_default_str();
  c_tr->add_option("--epochs", tr.cfg.epochs, "skip-gram epochs")->capture_default_str();
  c_tr->add_option("--batch-size", tr.cfg.batch_size, "positive pairs per step")->capture_default_str();
  c_tr->add_option("--lr", tr.cfg.lr, "Adam learning rate")->capture_default_str();
  c_tr->add_option("--clip-norm", tr.cfg.clip_norm, "global gradient norm limit (0: off)")->capture_default_str();
  c_tr->add_option("--neg-power", tr.cfg.neg_power, "exponent on word counts for negatives")->capture_default_str();
  c_tr->add_option("--seed", tr.cfg.seed, "random seed")->capture_default_str();
  c_tr->add_flag("--tied-encoder,!--untied-encoder", tr.cfg.tied_encoder, "share the encoder between sides")
      ->default_str("true");
  c_tr->add_flag("--relu", tr.cfg.relu, "ReLU between projection layers")->capture_default_str();
  c_tr->add_option("--ae-epochs", tr.cfg.ae_epochs, "auto-encoder epochs (two-stage)")->capture_default_str();
  c_tr->add_option("--ae-batch-size", tr.cfg.ae_batch_size, "auto-encoder batch size")->capture_default_str();
  c_tr->add_option("--ae-lr", tr.cfg.ae_lr, "auto-encoder learning rate")->capture_default_str();

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "correlate embedding distances with target and edit distances");
  c_ev->add_option("--embeddings", ev.embeddings, "word vectors")->required();
  c_ev->add_option("--pairs", ev.pairs, "evaluation pairs")->required();
  c_ev->add_option("--out", ev.out, "report (JSON)")->required();
  c_ev->add_option("--epoch", ev.epoch, "epoch label stored in the report")->capture_default_str();

  NeighborArgs nb;
  auto* c_nb = app.add_subcommand("neighbors", "nearest words by cosine similarity");
  c_nb->add_option("--embeddings", nb.embeddings, "word vectors")->required();
  c_nb->add_option("--word", nb.word, "query word")->required();
  c_nb->add_option("--k", nb.k, "neighbors to list")->capture_default_str();
  c_nb->add_option("--out", nb.out, "write tab-separated records here instead of a table on stdout");

  PairArgs pa;
  auto* c_pa = app.add_subcommand("make-pairs", "build the evaluation pair set from baseline vectors");
  c_pa->add_option("--baseline", pa.baseline, "baseline word vectors")->required();
  c_pa->add_option("--vocab", pa.vocab, "vocabulary file")->required();
  c_pa->add_option("--n", pa.n, "number of pairs")->capture_default_str();
  c_pa->add_option("--out", pa.out, "output pairs")->required();
  c_pa->add_option("--seed", pa.seed, "random seed")->capture_default_str();

  ConvertArgs cv;
  auto* c_cv = app.add_subcommand("convert-alignments", "convert published LibriSpeech alignments to TSV");
  c_cv->add_option("--input", cv.input, "alignment text file")->required();
  c_cv->add_option("--out", cv.out, "output alignments.tsv")->required();

  SynthTextArgs st;
  auto* c_st = app.add_subcommand("synth-text", "generate a topical synthetic text corpus");
  c_st->add_option("--out", st.out, "output corpus")->required();
  c_st->add_option("--sentences", st.cfg.n_sentences, "number of sentences")->capture_default_str();
  c_st->add_option("--off-topic", st.cfg.off_topic, "chance a content word leaves the topic")->capture_default_str();
  c_st->add_option("--seed", st.cfg.seed, "random seed")->capture_default_str();

  SynthSpeechArgs ss;
  auto* c_ss = app.add_subcommand("synth-speech", "synthesise aligned speech for a text corpus");
  c_ss->add_option("--corpus", ss.corpus, "text corpus")->required();
  c_ss->add_option("--out-dir", ss.out_dir, "dataset directory")->required();
  c_ss->add_option("--min-seconds", ss.cfg.min_seconds, "minimum total duration")->capture_default_str();
  c_ss->add_option("--sample-rate", ss.cfg.sample_rate, "samples per second")->capture_default_str();
  c_ss->add_option("--seed", ss.cfg.seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::kConfig, "usage", e.what());
  }

  auto level = spdlog::level::from_str(log_level);
  if (level == spdlog::level::off && log_level != "off") return fail(ErrorKind::kConfig, "log-level", "unknown level");
  log().set_level(level);

  CLI::App* cmd = app.get_subcommands().front();
  RunInfo run;
  run.command = cmd->get_name();
  run.config = "[" + run.command + "]\n" + cmd->config_to_str(true, false);
  if (cmd == c_base) run.seed = base.cfg.seed;
  if (cmd == c_clus) run.seed = clus.cfg.seed;
  if (cmd == c_tr) run.seed = tr.cfg.seed;
  if (cmd == c_pa) run.seed = pa.seed;
  if (cmd == c_st) run.seed = st.cfg.seed;
  if (cmd == c_ss) run.seed = ss.cfg.seed;

  try {
    if (cmd == c_base) run_train_baseline(base, run);
    if (cmd == c_mfcc) run_extract_mfcc(mfcc, run);
    if (cmd == c_norm) run_normalize(norm, run);
    if (cmd == c_clus) run_cluster(clus, run);
    if (cmd == c_enc) run_encode_units(enc, run);
    if (cmd == c_tr) run_train(tr, run);
    if (cmd == c_ev) run_eval(ev, run);
    if (cmd == c_nb) run_neighbors(nb, run);
    if (cmd == c_pa) run_make_pairs(pa, run);
    if (cmd == c_cv) run_convert_alignments(cv, run);
    if (cmd == c_st) run_synth_text(st, run);
    if (cmd == c_ss) run_synth_speech(ss, run);
  } catch (const Error& e) {
    return fail(e.kind(), e.tag(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorKind::kData, "io", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ErrorKind::kData, "malformed_json", e.what());
  }
  return 0;
}
