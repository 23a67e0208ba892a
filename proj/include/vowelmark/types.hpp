#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace vowelmark {

enum class Vowel : int { A = 0, I = 1 };
enum class Label : int { HC = 0, ALS = 1 };

inline char vowel_char(Vowel v) { return v == Vowel::A ? 'a' : 'i'; }

// A mono recording scaled to [-1, 1] plus its corpus identity.
struct VoiceRecording {
  std::vector<double> samples;
  double sample_rate = 0.0;
  std::string subject_id;
  Vowel vowel = Vowel::A;
  Label label = Label::HC;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Fundamental-frequency track at a fixed 5 ms step. Unvoiced frames carry
// f0 == 0 and voiced[m] == 0.
struct F0Contour {
  static constexpr double kStep = 0.005;  // seconds between frames

  std::vector<double> f0;        // Hz per frame
  std::vector<std::uint8_t> voiced;
  double mean_f0 = 0.0;          // over voiced frames

  std::size_t frames() const { return f0.size(); }

  std::size_t voiced_count() const {
    std::size_t n = 0;
    for (auto v : voiced) n += v ? 1 : 0;
    return n;
  }

  double voiced_fraction() const {
    return voiced.empty() ? 0.0 : static_cast<double>(voiced_count()) / voiced.size();
  }

  // Duration of voiced material in seconds.
  double voiced_seconds() const { return static_cast<double>(voiced_count()) * kStep; }
};

// Glottal-cycle boundaries (sample indices, strictly increasing) together
// with the derived per-cycle period T0(i) and peak amplitude A(i).
struct PeriodSegmentation {
  std::vector<std::size_t> boundaries;
  std::vector<double> t0;   // seconds, size boundaries.size() - 1
  std::vector<double> amp;  // peak |s| within cycle i

  std::size_t cycles() const { return t0.size(); }
};

}  // namespace vowelmark
