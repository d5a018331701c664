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

#include "deepskip/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include "deepskip/log.hpp"

namespace deepskip {

namespace {

struct Topic {
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;
  std::vector<std::string> adjs;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t = {
      {{"father", "mother", "brother", "sister", "daughter", "son", "uncle", "aunt", "cousin", "wife", "husband", "child"},
       {"loved", "married", "kissed", "raised", "visited", "embraced"},
       {"dear", "gentle", "loving", "proud", "young"}},
      {{"ship", "sea", "wave", "sailor", "captain", "deck", "harbor", "anchor", "island", "shore", "boat", "storm"},
       {"sailed", "drifted", "anchored", "rowed", "landed", "sank"},
       {"salty", "rough", "calm", "blue", "wide"}},
      {{"soldier", "army", "battle", "sword", "enemy", "general", "camp", "cannon", "gun", "fort", "flag", "victory"},
       {"fought", "attacked", "marched", "defeated", "defended", "charged"},
       {"brave", "fierce", "bloody", "loyal", "armed"}},
      {{"priest", "church", "prayer", "altar", "bishop", "saint", "angel", "heaven", "sin", "bible", "choir", "bell"},
       {"prayed", "blessed", "worshipped", "confessed", "preached", "sang"},
       {"holy", "sacred", "divine", "pious", "humble"}},
      {{"farmer", "field", "cow", "horse", "barn", "plough", "wheat", "sheep", "pig", "hay", "harvest", "orchard"},
       {"plowed", "milked", "planted", "reaped", "fed", "herded"},
       {"rural", "muddy", "fertile", "ripe", "rustic"}},
      {{"cook", "bread", "meat", "soup", "pot", "kettle", "oven", "plate", "spoon", "butter", "cheese", "supper"},
       {"baked", "boiled", "cooked", "ate", "served", "tasted"},
       {"hot", "delicious", "fresh", "sweet", "hungry"}},
      {{"tree", "forest", "wood", "oak", "pine", "leaf", "branch", "path", "moss", "fern", "deer", "owl"},
       {"wandered", "climbed", "hid", "rustled", "crept", "hunted"},
       {"dark", "green", "wild", "deep", "shady"}},
      {{"street", "city", "shop", "market", "crowd", "carriage", "bridge", "square", "tower", "lamp", "corner",
        "merchant"},
       {"walked", "bought", "sold", "crossed", "hurried", "shouted"},
       {"busy", "noisy", "crowded", "narrow", "grand"}},
      {{"teacher", "pupil", "lesson", "book", "school", "slate", "desk", "letter", "grammar", "master", "class",
        "chalk"},
       {"taught", "learned", "wrote", "studied", "read", "recited"},
       {"clever", "diligent", "idle", "strict", "wise"}},
      {{"doctor", "nurse", "fever", "wound", "medicine", "patient", "pain", "cure", "disease", "bandage", "hospital",
        "pill"},
       {"healed", "treated", "suffered", "bled", "recovered", "died"},
       {"sick", "pale", "weak", "feverish", "ill"}},
      {{"judge", "court", "law", "trial", "prisoner", "jury", "lawyer", "crime", "witness", "verdict", "jail", "thief"},
       {"accused", "sentenced", "pleaded", "testified", "convicted", "arrested"},
       {"guilty", "innocent", "just", "lawful", "cruel"}},
      {{"rain", "snow", "wind", "cloud", "thunder", "frost", "fog", "hail", "lightning", "mist", "breeze", "ice"},
       {"poured", "froze", "blew", "drizzled", "melted", "howled"},
       {"cold", "wet", "chilly", "foggy", "stormy"}},
      {{"song", "piano", "violin", "tune", "singer", "melody", "drum", "flute", "harp", "concert", "note", "chord"},
       {"played", "hummed", "strummed", "whistled", "composed", "tuned"},
       {"loud", "soft", "merry", "musical", "tuneful"}},
      {{"rose", "flower", "garden", "lily", "tulip", "gardener", "bloom", "seed", "hedge", "lawn", "daisy", "violet"},
       {"watered", "pruned", "weeded", "blossomed", "picked", "grew"},
       {"fragrant", "bright", "pretty", "lovely", "sunny"}},
      {{"journey", "road", "traveller", "inn", "coach", "mile", "stranger", "map", "luggage", "ticket", "station",
        "train"},
       {"travelled", "arrived", "departed", "rode", "waited", "returned"},
       {"long", "weary", "distant", "dusty", "foreign"}},
      {{"money", "gold", "coin", "bank", "price", "debt", "silver", "purse", "wage", "profit", "fortune", "banker"},
       {"paid", "earned", "spent", "owed", "borrowed", "counted"},
       {"rich", "poor", "costly", "cheap", "wealthy"}},
      {{"king", "queen", "prince", "princess", "throne", "crown", "palace", "castle", "knight", "lord", "duke",
        "realm"},
       {"ruled", "reigned", "crowned", "bowed", "knelt", "commanded"},
       {"royal", "noble", "mighty", "regal", "majestic"}},
      {{"dog", "cat", "puppy", "kitten", "tail", "paw", "collar", "kennel", "bone", "fur", "whisker", "leash"},
       {"barked", "purred", "wagged", "bit", "licked", "chased"},
       {"furry", "playful", "tame", "lazy", "faithful"}},
      {{"fire", "flame", "smoke", "coal", "ash", "spark", "chimney", "hearth", "furnace", "ember", "log", "candle"},
       {"burned", "lit", "blazed", "smouldered", "glowed", "kindled"},
       {"warm", "fiery", "smoky", "red", "golden"}},
      {{"sleep", "dream", "bed", "pillow", "blanket", "night", "moon", "star", "nightmare", "lullaby", "cradle",
        "sheet"},
       {"slept", "dreamed", "woke", "yawned", "snored", "rested"},
       {"tired", "sleepy", "drowsy", "quiet", "silent"}},
      {{"fear", "joy", "hope", "love", "anger", "sorrow", "grief", "pity", "shame", "pride", "courage", "despair"},
       {"wept", "laughed", "trembled", "smiled", "sighed", "rejoiced"},
       {"happy", "sad", "angry", "afraid", "glad"}},
      {{"hand", "head", "eye", "face", "heart", "arm", "foot", "finger", "lip", "shoulder", "knee", "hair"},
       {"touched", "held", "lifted", "grasped", "nodded", "waved"},
       {"tall", "thin", "strong", "fair", "beautiful"}},
      {{"pen", "ink", "paper", "envelope", "stamp", "diary", "page", "poem", "story", "novel", "author", "poet"},
       {"scribbled", "signed", "posted", "published", "copied", "sealed"},
       {"printed", "secret", "lengthy", "famous", "literary"}},
      {{"house", "room", "door", "window", "wall", "roof", "floor", "stair", "chair", "table", "cupboard", "curtain"},
       {"opened", "closed", "locked", "entered", "knocked", "swept"},
       {"empty", "cosy", "tidy", "spacious", "shabby"}},
      {{"mountain", "hill", "valley", "cliff", "rock", "cave", "peak", "glacier", "slope", "summit", "ridge",
        "stone"},
       {"scaled", "descended", "explored", "fell", "slipped", "camped"},
       {"steep", "high", "rocky", "lofty", "icy"}},
      {{"river", "stream", "lake", "pond", "waterfall", "fish", "mill", "reed", "ferry", "canal", "frog", "willow"},
       {"swam", "fished", "flowed", "waded", "splashed", "floated"},
       {"shallow", "clear", "murky", "swift", "winding"}},
      {{"coat", "hat", "dress", "shoe", "boot", "glove", "shirt", "scarf", "cloak", "button", "ribbon", "bonnet"},
       {"wore", "sewed", "stitched", "knitted", "buttoned", "mended"},
       {"new", "ragged", "silk", "woollen", "elegant"}},
      {{"day", "week", "month", "year", "hour", "minute", "morning", "evening", "spring", "summer", "autumn",
        "winter"},
       {"passed", "began", "ended", "lasted", "came", "went"},
       {"early", "late", "next", "last", "whole"}},
      {{"science", "experiment", "theory", "chemist", "lens", "telescope", "planet", "atom", "machine", "engine",
        "invention", "professor"},
       {"discovered", "measured", "invented", "observed", "tested", "calculated"},
       {"modern", "scientific", "exact", "precise", "curious"}},
      {{"bird", "sparrow", "eagle", "crow", "nest", "wing", "feather", "sky", "swallow", "robin", "pigeon", "beak"},
       {"flew", "soared", "perched", "chirped", "nested", "fluttered"},
       {"graceful", "tiny", "feathered", "airy", "light"}},
  };
  return t;
}

// Templates over slots N (noun), V (verb), A (adjective), P (pronoun),
// S (possessive); any other token is literal.
const std::vector<std::vector<std::string>>& templates() {
  static const std::vector<std::vector<std::string>> t = {
      {"the", "A", "N", "V", "the", "N"},
      {"the", "N", "and", "the", "N", "V", "in", "the", "A", "N"},
      {"P", "V", "the", "N", "with", "S", "A", "N"},
      {"when", "the", "N", "V", "the", "N", "was", "A"},
      {"there", "was", "a", "A", "N", "in", "the", "N", "and", "it", "was", "A"},
      {"P", "V", "to", "the", "N", "but", "the", "N", "was", "not", "A"},
      {"S", "N", "V", "and", "the", "A", "N", "V", "at", "the", "N"},
      {"then", "the", "N", "V", "by", "the", "N", "of", "the", "N"},
      {"it", "was", "a", "A", "N", "so", "P", "V", "the", "N"},
      {"all", "the", "N", "V", "on", "that", "A", "N"},
      {"P", "had", "a", "N", "and", "a", "A", "N"},
      {"the", "N", "of", "the", "N", "V", "from", "the", "A", "N"},
  };
  return t;
}

const std::string& pick(const std::vector<std::string>& v, Rng& rng) {
  // Mildly skewed: weight 1/sqrt(rank + 1).
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) z += 1.0 / std::sqrt(static_cast<double>(i + 1));
  double u = uniform01(rng) * z;
  for (std::size_t i = 0; i < v.size(); ++i) {
    u -= 1.0 / std::sqrt(static_cast<double>(i + 1));
    if (u < 0.0) return v[i];
  }
  return v.back();
}

}  // namespace

std::vector<std::pair<std::string, int>> narrative_topics() {
  std::vector<std::pair<std::string, int>> out;
  const auto& ts = topics();
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (const auto* list : {&ts[i].nouns, &ts[i].verbs, &ts[i].adjs})
      for (const auto& w : *list) out.emplace_back(w, static_cast<int>(i));
  return out;
}

std::vector<Sentence> make_narrative_corpus(const TextSynthConfig& cfg) {
  if (cfg.n_sentences < 1) throw ConfigError("n_sentences", "n_sentences must be >= 1");
  if (cfg.off_topic < 0.0 || cfg.off_topic > 1.0) throw ConfigError("off_topic", "off_topic must be in [0, 1]");
  Rng rng = make_rng(cfg.seed, "narrative");
  const auto& ts = topics();
  const auto& tpl = templates();
  static const std::vector<std::string> pron{"he", "she", "they"};
  static const std::vector<std::string> poss{"his", "her", "their"};
  std::vector<Sentence> out;
  out.reserve(static_cast<std::size_t>(cfg.n_sentences));
  for (int i = 0; i < cfg.n_sentences; ++i) {
    const std::size_t topic = uniform_index(rng, ts.size());
    const auto& form = tpl[uniform_index(rng, tpl.size())];
    Sentence s;
    char id[32];
    std::snprintf(id, sizeof id, "s%05d", i);
    s.utt_id = id;
    const std::size_t who = uniform_index(rng, pron.size());
    for (const auto& slot : form) {
      const Topic& t = uniform01(rng) < cfg.off_topic ? ts[uniform_index(rng, ts.size())] : ts[topic];
      if (slot == "N") s.tokens.push_back(pick(t.nouns, rng));
      else if (slot == "V") s.tokens.push_back(pick(t.verbs, rng));
      else if (slot == "A") s.tokens.push_back(pick(t.adjs, rng));
      else if (slot == "P") s.tokens.push_back(pron[who]);
      else if (slot == "S") s.tokens.push_back(poss[who]);
      else s.tokens.push_back(slot);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

enum class Source { kVoiced, kNoise, kMixed, kBurst };

struct Phone {
  Source source;
  double f1, f2, f3;
  double gain;
};

// One steady segment per letter; index 26 covers anything else.
const Phone& phone_of(char c) {
  static const Phone table[27] = {
      {Source::kVoiced, 730, 1090, 2440, 1.0},   // a
      {Source::kBurst, 200, 900, 2200, 0.6},     // b
      {Source::kNoise, 2900, 4200, 5600, 0.35},  // c
      {Source::kBurst, 250, 1700, 2600, 0.6},    // d
      {Source::kVoiced, 530, 1840, 2480, 1.0},   // e
      {Source::kNoise, 1400, 3400, 5200, 0.3},   // f
      {Source::kBurst, 230, 2000, 2850, 0.6},    // g
      {Source::kNoise, 600, 1500, 2500, 0.25},   // h
      {Source::kVoiced, 270, 2290, 3010, 1.0},   // i
      {Source::kMixed, 280, 2100, 2800, 0.6},    // j
      {Source::kNoise, 1800, 2600, 3600, 0.4},   // k
      {Source::kVoiced, 360, 1300, 2700, 0.7},   // l
      {Source::kVoiced, 250, 1100, 2300, 0.5},   // m
      {Source::kVoiced, 250, 1600, 2500, 0.5},   // n
      {Source::kVoiced, 570, 840, 2410, 1.0},    // o
      {Source::kNoise, 700, 1200, 2300, 0.4},    // p
      {Source::kNoise, 1500, 2300, 3300, 0.4},   // q
      {Source::kVoiced, 460, 1200, 1600, 0.7},   // r
      {Source::kNoise, 4500, 5600, 6800, 0.35},  // s
      {Source::kNoise, 3200, 4400, 5400, 0.4},   // t
      {Source::kVoiced, 300, 870, 2240, 1.0},    // u
      {Source::kMixed, 300, 1500, 2500, 0.5},    // v
      {Source::kVoiced, 300, 650, 2200, 0.7},    // w
      {Source::kNoise, 2300, 3900, 5000, 0.4},   // x
      {Source::kVoiced, 400, 2000, 2650, 0.9},   // y
      {Source::kMixed, 280, 1800, 4700, 0.5},    // z
      {Source::kVoiced, 500, 1500, 2500, 0.5},   // other
  };
  if (c >= 'a' && c <= 'z') return table[c - 'a'];
  return table[26];
}

// Two-pole resonator with unit DC gain.
struct Resonator {
  double a = 0, b = 0, c = 0, y1 = 0, y2 = 0;
  void set(double freq, double bw, double fs) {
    c = -std::exp(-2.0 * std::numbers::pi * bw / fs);
    b = 2.0 * std::exp(-std::numbers::pi * bw / fs) * std::cos(2.0 * std::numbers::pi * freq / fs);
    a = 1.0 - b - c;
  }
  double step(double x) {
    const double y = a * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double gaussian(Rng& rng) {
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::vector<SynthUtterance> synthesize_speech(std::span<const Sentence> sentences, const SpeechSynthConfig& cfg) {
  if (cfg.sample_rate < 8000) throw ConfigError("sample_rate", "sample_rate must be >= 8000");
  if (cfg.min_seconds <= 0.0 || cfg.letter_seconds <= 0.0 || cfg.gap_seconds < 0.0 || cfg.edge_seconds < 0.0) {
    throw ConfigError("speech_durations", "speech durations must be positive");
  }
  bool any = false;
  for (const auto& s : sentences) any = any || !s.tokens.empty();
  if (!any) throw DataError("empty_corpus", "no non-empty sentences to synthesise");
  Rng rng = make_rng(cfg.seed, "speech");
  const double fs = cfg.sample_rate;
  std::vector<SynthUtterance> out;
  double total = 0.0;
  for (std::size_t i = 0; total < cfg.min_seconds; i = (i + 1) % sentences.size()) {
    const Sentence& s = sentences[i];
    if (s.tokens.empty()) continue;
    SynthUtterance u;
    char id[32];
    std::snprintf(id, sizeof id, "utt%05zu", out.size());
    u.utt_id = id;
    u.alignment.utt_id = id;
    u.wave.sample_rate = cfg.sample_rate;
    const double f0 = 100.0 + 120.0 * uniform01(rng);
    const double fscale = 0.93 + 0.14 * uniform01(rng);
    const double rate = 0.85 + 0.3 * uniform01(rng);
    std::vector<double>& x = u.wave.samples;
    auto silence = [&](double sec) {
      const auto n = static_cast<std::size_t>(std::lround(sec * fs));
      for (std::size_t k = 0; k < n; ++k) x.push_back(cfg.noise_level * gaussian(rng));
    };
    silence(cfg.edge_seconds);
    for (std::size_t w = 0; w < s.tokens.size(); ++w) {
      const std::string& word = s.tokens[w];
      const double start = static_cast<double>(x.size()) / fs;
      double phase = 0.0;
      for (char ch : word) {
        const Phone& p = phone_of(ch);
        const double dur = cfg.letter_seconds * rate * (0.85 + 0.3 * uniform01(rng));
        const auto n = static_cast<std::size_t>(std::lround(dur * fs));
        Resonator r1, r2, r3;
        r1.set(p.f1 * fscale, 80.0, fs);
        r2.set(std::min(p.f2 * fscale, 0.45 * fs), 120.0, fs);
        r3.set(std::min(p.f3 * fscale, 0.47 * fs), 180.0, fs);
        const double ramp = 0.005 * fs;
        for (std::size_t k = 0; k < n; ++k) {
          double src = 0.0;
          const bool voiced = p.source == Source::kVoiced || p.source == Source::kMixed ||
                              (p.source == Source::kBurst && k > n / 3);
          if (voiced) {
            phase += f0 / fs;
            if (phase >= 1.0) {
              phase -= 1.0;
              src += 1.0;
            }
          }
          if (p.source == Source::kNoise || p.source == Source::kMixed ||
              (p.source == Source::kBurst && k <= n / 3)) {
            src += 0.3 * gaussian(rng);
          }
          double y = r3.step(r2.step(r1.step(src)));
          const double env = std::min({1.0, static_cast<double>(k) / ramp, static_cast<double>(n - k) / ramp});
          x.push_back(p.gain * 0.25 * env * y + cfg.noise_level * gaussian(rng));
        }
      }
      const double end = static_cast<double>(x.size()) / fs;
      u.alignment.words.push_back({word, start, end});
      silence(cfg.gap_seconds * (0.7 + 0.6 * uniform01(rng)));
    }
    silence(cfg.edge_seconds);
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    if (peak > 0.95)
      for (double& v : x) v *= 0.95 / peak;
    total += static_cast<double>(x.size()) / fs;
    out.push_back(std::move(u));
  }
  return out;
}

std::string write_speech_dataset(std::span<const SynthUtterance> utts, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "wav");
  fs::create_directories(fs::path(dir) / "features");
  std::vector<ManifestEntry> manifest;
  std::vector<Alignment> als;
  std::ofstream tr(fs::path(dir) / "transcripts.txt");
  if (!tr) throw DataError("io", "cannot write transcripts in " + dir);
  for (const auto& u : utts) {
    write_wav((fs::path(dir) / "wav" / (u.utt_id + ".wav")).string(), u.wave);
    ManifestEntry e;
    e.utt_id = u.utt_id;
    e.audio_path = "wav/" + u.utt_id + ".wav";
    e.feature_path = "features/" + u.utt_id + ".afv";
    e.alignment = u.alignment;
    manifest.push_back(e);
    als.push_back(u.alignment);
    tr << u.utt_id << '\t';
    for (std::size_t i = 0; i < u.alignment.words.size(); ++i) tr << (i ? " " : "") << u.alignment.words[i].word;
    tr << '\n';
  }
  save_alignments(als, (fs::path(dir) / "alignments.tsv").string());
  const std::string mpath = (fs::path(dir) / "manifest.jsonl").string();
  write_manifest(manifest, mpath);
  return mpath;
}

}  // namespace deepskip
