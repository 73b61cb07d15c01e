// include/emoeval/dsp.h

// Copyright 2026 The emoeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EMOEVAL_DSP_H_
#define EMOEVAL_DSP_H_

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace emoeval {
namespace dsp {

constexpr int kDefaultSampleRate = 16000;

struct Waveform {
  std::vector<float> samples;
  int sample_rate_hz = kDefaultSampleRate;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Row-major T x D matrix of frame features.
struct FeatureMatrix {
  size_t num_frames = 0;
  size_t dim = 0;
  std::vector<double> data;

  double& at(size_t t, size_t d) { return data[t * dim + d]; }
  double at(size_t t, size_t d) const { return data[t * dim + d]; }
  std::span<const double> row(size_t t) const {
    return {data.data() + t * dim, dim};
  }
};

// --- WAV I/O: 16-bit PCM, mono, little-endian. Everything else is rejected.

Waveform ReadWav(const std::string& path);
void WriteWav(const Waveform& w, const std::string& path);

struct WavInfo {
  int sample_rate_hz = 0;
  size_t num_samples = 0;
};
WavInfo ReadWavInfo(const std::string& path);

// --- Power and SNR.

// Mean squared amplitude. Throws DomainError on empty input.
double SignalPower(std::span<const float> samples);
inline double SignalPower(const Waveform& w) { return SignalPower(w.samples); }

// 10*log10(P_signal / P_noise). Zero-power noise yields +inf, zero-power
// signal yields -inf.
double SnrDb(const Waveform& signal, const Waveform& noise);

enum class LengthPolicy { kTile, kError };

struct MixResult {
  Waveform mix;
  double noise_gain = 0.0;   // g applied to the noise
  double peak_scale = 1.0;   // < 1 when the mixture was peak-normalised
};

// Returns signal + g*noise with g chosen so SnrDb(signal, g*noise) equals
// target_db. A mixture whose peak exceeds 1 is scaled down as a whole, which
// leaves the ratio unchanged. +inf target or silent noise returns the signal.
MixResult MixAtSnr(const Waveform& signal, const Waveform& noise,
                   double target_db, LengthPolicy policy = LengthPolicy::kTile);

// Scales a waveform so its peak is at most 1.
void PeakNormalize(Waveform* w);

// --- Features.

struct MfbOptions {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int num_filters = 40;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 means Nyquist
  double energy_floor = 1e-10;
};

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Centre frequencies of the triangular filters, in Hz.
std::vector<double> MelCenterFrequencies(int sample_rate_hz,
                                         const MfbOptions& opts = {});

// Number of frames for a signal of num_samples, or 0 if shorter than a frame.
size_t NumFrames(size_t num_samples, int sample_rate_hz,
                 const MfbOptions& opts = {});

// Log mel filterbank energies of Hamming-windowed frames.
FeatureMatrix ExtractMfb(const Waveform& w, const MfbOptions& opts = {});

// Per-dimension mean followed by per-dimension population standard
// deviation over frames; 2*dim values. Throws DomainError with no frames.
std::vector<double> PoolMeanStd(const FeatureMatrix& m);

// Per-group, per-dimension z-normalisation with pooled statistics over every
// matrix sharing a group key. Zero-variance dimensions map to 0.
void ZNormalize(std::vector<FeatureMatrix>* features,
                const std::vector<std::string>& group_keys);

// In-place radix-2 FFT; size must be a power of two.
void Fft(std::vector<std::complex<double>>* data);

// --- Time-domain resampling and stretching.

enum class Interpolation { kLinear, kSinc };

// Plays the signal `factor` times faster: output length round(N / factor),
// sample rate unchanged.
Waveform Resample(const Waveform& w, double factor,
                  Interpolation interp = Interpolation::kLinear);

// WSOLA time-scale modification. The output has exactly
// round(N * stretch) samples and the same pitch.
Waveform TimeStretch(const Waveform& w, double stretch);

// --- Feature dump: 16-byte header ("MFB1", uint32 T, uint32 D, uint32 dtype)
// followed by T*D little-endian values in row-major order.

enum class DumpType : uint32_t { kFloat32 = 1, kFloat64 = 2 };

void WriteFeatureMatrix(const FeatureMatrix& m, const std::string& path,
                        DumpType type = DumpType::kFloat32);
FeatureMatrix ReadFeatureMatrix(const std::string& path);

}  // namespace dsp
}  // namespace emoeval

#endif  // EMOEVAL_DSP_H_
