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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deepskip/audio.hpp"
#include "deepskip/corpus.hpp"

namespace deepskip {

/// Topic-coherent narrative sentences over a fixed English word inventory.
/// Each sentence picks a topic and fills a template with that topic's
/// nouns, verbs and adjectives; function words are shared by all topics.
struct TextSynthConfig {
  int n_sentences = 1500;
  double off_topic = 0.1;  // chance that a content slot draws from another topic
  std::uint64_t seed = 1;
};

std::vector<Sentence> make_narrative_corpus(const TextSynthConfig& cfg);

/// Topic index of every content word (function words are absent).
std::vector<std::pair<std::string, int>> narrative_topics();

/// Formant-synthesised speech: every letter is a short steady segment with
/// its own source (pulses, noise or both) and three resonances; speaker
/// pitch, formant scale and letter durations vary per utterance and
/// occurrence. Words are separated by low-level noise.
struct SpeechSynthConfig {
  int sample_rate = 16000;
  double min_seconds = 600.0;  // keep adding utterances until reached
  double letter_seconds = 0.07;
  double gap_seconds = 0.08;
  double edge_seconds = 0.2;
  double noise_level = 1e-3;
  std::uint64_t seed = 1;
};

struct SynthUtterance {
  std::string utt_id;
  Waveform wave;
  Alignment alignment;
};

/// Cycles through `sentences` (skipping empty ones) until min_seconds of
/// audio exist.
std::vector<SynthUtterance> synthesize_speech(std::span<const Sentence> sentences, const SpeechSynthConfig& cfg);

/// Writes <dir>/wav/<utt>.wav, <dir>/alignments.tsv, <dir>/transcripts.txt
/// and <dir>/manifest.jsonl whose feature paths point at features/<utt>.afv.
/// Returns the manifest path.
std::string write_speech_dataset(std::span<const SynthUtterance> utts, const std::string& dir);

}  // namespace deepskip
