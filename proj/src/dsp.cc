// src/dsp.cc

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

#include "emoeval/dsp.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "emoeval/error.h"

namespace emoeval {
namespace dsp {

namespace {

uint32_t ReadU32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const unsigned char* p) { return p[0] | (p[1] << 8); }

void PutU32(std::string* out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string* out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

struct ParsedWav {
  int sample_rate = 0;
  std::vector<unsigned char> pcm;
};

ParsedWav ParseWav(const std::string& path, bool want_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);
  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12) ||
      std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw IoError(path + ": not a RIFF/WAVE file");
  }
  ParsedWav out;
  bool have_fmt = false;
  unsigned char hdr[8];
  while (in.read(reinterpret_cast<char*>(hdr), 8)) {
    const uint32_t size = ReadU32(hdr + 4);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(path + ": short fmt chunk");
      std::vector<unsigned char> fmt(size + (size & 1));
      in.read(reinterpret_cast<char*>(fmt.data()), fmt.size());
      const uint16_t format = ReadU16(fmt.data());
      const uint16_t channels = ReadU16(fmt.data() + 2);
      const uint16_t bits = ReadU16(fmt.data() + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw IoError(path + ": only 16-bit PCM mono wav is supported");
      }
      out.sample_rate = static_cast<int>(ReadU32(fmt.data() + 4));
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw IoError(path + ": data chunk before fmt chunk");
      out.pcm.resize(size);
      if (want_data) {
        if (!in.read(reinterpret_cast<char*>(out.pcm.data()), size)) {
          throw IoError(path + ": truncated data chunk");
        }
      }
      return out;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw IoError(path + ": no data chunk");
}

size_t FrameLength(int sample_rate, double ms) {
  return static_cast<size_t>(std::lround(ms * sample_rate / 1000.0));
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  ParsedWav p = ParseWav(path, true);
  Waveform w;
  w.sample_rate_hz = p.sample_rate;
  w.samples.resize(p.pcm.size() / 2);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const int16_t v = static_cast<int16_t>(ReadU16(&p.pcm[2 * i]));
    w.samples[i] = static_cast<float>(v) / 32768.0f;
  }
  return w;
}

WavInfo ReadWavInfo(const std::string& path) {
  ParsedWav p = ParseWav(path, false);
  return {p.sample_rate, p.pcm.size() / 2};
}

void WriteWav(const Waveform& w, const std::string& path) {
  const uint32_t data_bytes = static_cast<uint32_t>(w.samples.size() * 2);
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  PutU32(&buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  PutU32(&buf, 16);
  PutU16(&buf, 1);
  PutU16(&buf, 1);
  PutU32(&buf, static_cast<uint32_t>(w.sample_rate_hz));
  PutU32(&buf, static_cast<uint32_t>(w.sample_rate_hz) * 2);
  PutU16(&buf, 2);
  PutU16(&buf, 16);
  buf += "data";
  PutU32(&buf, data_bytes);
  for (float s : w.samples) {
    const float c = std::clamp(s, -1.0f, 1.0f);
    const long q = std::lround(c * 32768.0f);
    PutU16(&buf, static_cast<uint16_t>(static_cast<int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(buf.data(), buf.size())) {
    throw IoError("cannot write wav file: " + path);
  }
}

double SignalPower(std::span<const float> samples) {
  if (samples.empty()) throw DomainError("signal power of an empty signal");
  double acc = 0.0;
  for (float s : samples) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(samples.size());
}

double SnrDb(const Waveform& signal, const Waveform& noise) {
  if (signal.samples.size() != noise.samples.size() ||
      signal.sample_rate_hz != noise.sample_rate_hz) {
    throw DomainError("snr: signal and noise differ in length or rate");
  }
  const double ps = SignalPower(signal);
  const double pn = SignalPower(noise);
  if (pn == 0.0) return std::numeric_limits<double>::infinity();
  if (ps == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ps / pn);
}

void PeakNormalize(Waveform* w) {
  float peak = 0.0f;
  for (float s : w->samples) peak = std::max(peak, std::fabs(s));
  if (peak > 1.0f) {
    const float scale = 1.0f / peak;
    for (float& s : w->samples) s *= scale;
  }
}

MixResult MixAtSnr(const Waveform& signal, const Waveform& noise,
                   double target_db, LengthPolicy policy) {
  if (signal.sample_rate_hz != noise.sample_rate_hz) {
    throw DomainError("mix: sample rates differ");
  }
  const double ps = SignalPower(signal);
  if (ps == 0.0) throw DomainError("mix: signal is silent");
  MixResult out;
  out.mix = signal;
  if (noise.samples.empty() || (std::isinf(target_db) && target_db > 0)) return out;
  if (noise.samples.size() < signal.samples.size() && policy == LengthPolicy::kError) {
    throw DomainError("mix: noise shorter than signal");
  }
  const size_t n = signal.samples.size();
  std::vector<float> fitted(n);
  for (size_t i = 0; i < n; ++i) fitted[i] = noise.samples[i % noise.samples.size()];
  const double pn = SignalPower(fitted);
  if (pn == 0.0) return out;

  const double gain = std::sqrt(ps / (pn * std::pow(10.0, target_db / 10.0)));
  out.noise_gain = gain;
  double peak = 0.0;
  std::vector<double> mixed(n);
  for (size_t i = 0; i < n; ++i) {
    mixed[i] = signal.samples[i] + gain * fitted[i];
    peak = std::max(peak, std::fabs(mixed[i]));
  }
  if (peak > 1.0) out.peak_scale = 1.0 / peak;
  for (size_t i = 0; i < n; ++i) {
    out.mix.samples[i] = static_cast<float>(mixed[i] * out.peak_scale);
  }
  return out;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelCenterFrequencies(int sample_rate_hz, const MfbOptions& opts) {
  const double high = opts.high_hz > 0 ? opts.high_hz : sample_rate_hz / 2.0;
  const double mel_lo = HzToMel(opts.low_hz), mel_hi = HzToMel(high);
  const double step = (mel_hi - mel_lo) / (opts.num_filters + 1);
  std::vector<double> centers(opts.num_filters);
  for (int m = 0; m < opts.num_filters; ++m) {
    centers[m] = MelToHz(mel_lo + (m + 1) * step);
  }
  return centers;
}

size_t NumFrames(size_t num_samples, int sample_rate_hz, const MfbOptions& opts) {
  const size_t len = FrameLength(sample_rate_hz, opts.frame_ms);
  const size_t hop = FrameLength(sample_rate_hz, opts.hop_ms);
  if (num_samples < len) return 0;
  return (num_samples - len) / hop + 1;
}

void Fft(std::vector<std::complex<double>>* data) {
  auto& a = *data;
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw DomainError("fft size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

FeatureMatrix ExtractMfb(const Waveform& w, const MfbOptions& opts) {
  const int sr = w.sample_rate_hz;
  const size_t frame_len = FrameLength(sr, opts.frame_ms);
  const size_t hop = FrameLength(sr, opts.hop_ms);
  const size_t num_frames = NumFrames(w.samples.size(), sr, opts);
  if (num_frames == 0) throw DomainError("audio shorter than one analysis frame");

  size_t nfft = 1;
  while (nfft < frame_len) nfft <<= 1;
  const size_t nbins = nfft / 2 + 1;

  std::vector<double> window(frame_len);
  for (size_t i = 0; i < frame_len; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (frame_len - 1));
  }

  // Triangular filters on the HTK mel scale, evaluated at FFT bin centres.
  const double high = opts.high_hz > 0 ? opts.high_hz : sr / 2.0;
  const double mel_lo = HzToMel(opts.low_hz), mel_hi = HzToMel(high);
  const int nf = opts.num_filters;
  std::vector<double> edges(nf + 2);
  for (int m = 0; m < nf + 2; ++m) {
    edges[m] = MelToHz(mel_lo + m * (mel_hi - mel_lo) / (nf + 1));
  }
  std::vector<std::vector<double>> weights(nf, std::vector<double>(nbins, 0.0));
  for (int m = 0; m < nf; ++m) {
    const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
    for (size_t k = 0; k < nbins; ++k) {
      const double f = static_cast<double>(k) * sr / nfft;
      if (f > l && f <= c) {
        weights[m][k] = (f - l) / (c - l);
      } else if (f > c && f < r) {
        weights[m][k] = (r - f) / (r - c);
      }
    }
  }

  FeatureMatrix out;
  out.num_frames = num_frames;
  out.dim = nf;
  out.data.resize(num_frames * nf);
  std::vector<std::complex<double>> buf(nfft);
  std::vector<double> power(nbins);
  for (size_t t = 0; t < num_frames; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (size_t i = 0; i < frame_len; ++i) {
      buf[i] = w.samples[t * hop + i] * window[i];
    }
    Fft(&buf);
    for (size_t k = 0; k < nbins; ++k) power[k] = std::norm(buf[k]);
    for (int m = 0; m < nf; ++m) {
      double e = 0.0;
      for (size_t k = 0; k < nbins; ++k) e += weights[m][k] * power[k];
      out.at(t, m) = std::log(std::max(e, opts.energy_floor));
    }
  }
  return out;
}

void ZNormalize(std::vector<FeatureMatrix>* features,
                const std::vector<std::string>& group_keys) {
  if (features->size() != group_keys.size()) {
    throw DomainError("znorm: one group key per matrix required");
  }
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < group_keys.size(); ++i) groups[group_keys[i]].push_back(i);

  for (const auto& [key, members] : groups) {
    const size_t dim = (*features)[members.front()].dim;
    size_t count = 0;
    std::vector<double> sum(dim, 0.0), sumsq(dim, 0.0);
    for (size_t idx : members) {
      const auto& m = (*features)[idx];
      if (m.dim != dim) throw DomainError("znorm: mixed dimensions in group " + key);
      for (size_t t = 0; t < m.num_frames; ++t) {
        for (size_t d = 0; d < dim; ++d) sum[d] += m.at(t, d);
      }
      count += m.num_frames;
    }
    if (count < 2) throw DomainError("znorm: group " + key + " has fewer than 2 frames");
    std::vector<double> mean(dim), inv_std(dim);
    for (size_t d = 0; d < dim; ++d) mean[d] = sum[d] / count;
    // Two-pass variance.
    for (size_t idx : members) {
      const auto& m = (*features)[idx];
      for (size_t t = 0; t < m.num_frames; ++t) {
        for (size_t d = 0; d < dim; ++d) {
          const double c = m.at(t, d) - mean[d];
          sumsq[d] += c * c;
        }
      }
    }
    for (size_t d = 0; d < dim; ++d) {
      const double var = sumsq[d] / count;
      const double scale = std::max(1.0, mean[d] * mean[d]);
      inv_std[d] = var > 1e-20 * scale ? 1.0 / std::sqrt(var) : 0.0;
    }
    for (size_t idx : members) {
      auto& m = (*features)[idx];
      for (size_t t = 0; t < m.num_frames; ++t) {
        for (size_t d = 0; d < dim; ++d) m.at(t, d) = (m.at(t, d) - mean[d]) * inv_std[d];
      }
    }
  }
}

Waveform Resample(const Waveform& w, double factor, Interpolation interp) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("resample factor must be positive");
  }
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  const size_t n = w.samples.size();
  if (n == 0) return out;
  const size_t m = static_cast<size_t>(std::llround(n / factor));
  out.samples.resize(m);
  if (factor == 1.0) {
    out.samples = w.samples;
    return out;
  }
  if (interp == Interpolation::kLinear) {
    for (size_t i = 0; i < m; ++i) {
      const double pos = i * factor;
      const size_t k = static_cast<size_t>(pos);
      const double frac = pos - k;
      const double a = w.samples[std::min(k, n - 1)];
      const double b = w.samples[std::min(k + 1, n - 1)];
      out.samples[i] = static_cast<float>(a + frac * (b - a));
    }
    return out;
  }
  // Hann-windowed sinc, cutoff lowered when speeding up to avoid aliasing.
  constexpr int kHalfWidth = 16;
  const double cutoff = std::min(1.0, 1.0 / factor);
  const double support = kHalfWidth / cutoff;
  for (size_t i = 0; i < m; ++i) {
    const double pos = i * factor;
    const long lo = static_cast<long>(std::ceil(pos - support));
    const long hi = static_cast<long>(std::floor(pos + support));
    double acc = 0.0;
    for (long k = std::max(lo, 0L); k <= std::min(hi, static_cast<long>(n) - 1); ++k) {
      const double x = pos - k;
      const double arg = M_PI * cutoff * x;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(arg) / arg;
      const double win = 0.5 + 0.5 * std::cos(M_PI * x / support);
      acc += w.samples[k] * cutoff * sinc * win;
    }
    out.samples[i] = static_cast<float>(acc);
  }
  return out;
}

Waveform TimeStretch(const Waveform& w, double stretch) {
  if (!(stretch > 0.0) || !std::isfinite(stretch)) {
    throw DomainError("stretch factor must be positive");
  }
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  const long n = static_cast<long>(w.samples.size());
  const long m = std::llround(n * stretch);
  if (n == 0 || m == 0) return out;
  if (stretch == 1.0) {
    out.samples = w.samples;
    return out;
  }

  const long win = std::max<long>(32, std::lround(0.032 * w.sample_rate_hz)) & ~1L;
  const long hop = win / 2;
  const long tol = win / 4;
  std::vector<double> window(win);
  for (long i = 0; i < win; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win);

  auto sample = [&](long i) -> double {
    return (i >= 0 && i < n) ? w.samples[i] : 0.0;
  };

  std::vector<double> acc(m + win, 0.0), norm(m + win, 0.0);
  long prev_start = 0;
  for (long o = 0, j = 0; o < m; o += hop, ++j) {
    long start = 0;
    if (j > 0) {
      const long nominal = std::lround(o / stretch);
      const long natural = prev_start + hop;
      double best = -std::numeric_limits<double>::infinity();
      start = nominal;
      for (long d = -tol; d <= tol; ++d) {
        const long cand = nominal + d;
        double c = 0.0;
        for (long i = 0; i < win; ++i) c += sample(cand + i) * sample(natural + i);
        if (c > best) {
          best = c;
          start = cand;
        }
      }
    }
    for (long i = 0; i < win && o + i < m + win; ++i) {
      acc[o + i] += window[i] * sample(start + i);
      norm[o + i] += window[i];
    }
    prev_start = start;
  }
  out.samples.resize(m);
  for (long i = 0; i < m; ++i) {
    out.samples[i] = static_cast<float>(norm[i] > 1e-3 ? acc[i] / norm[i] : 0.0);
  }
  return out;
}

void WriteFeatureMatrix(const FeatureMatrix& m, const std::string& path, DumpType type) {
  std::string buf = "MFB1";
  PutU32(&buf, static_cast<uint32_t>(m.num_frames));
  PutU32(&buf, static_cast<uint32_t>(m.dim));
  PutU32(&buf, static_cast<uint32_t>(type));
  for (double v : m.data) {
    if (type == DumpType::kFloat32) {
      const float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      PutU32(&buf, bits);
    } else {
      uint64_t bits;
      std::memcpy(&bits, &v, 8);
      PutU32(&buf, static_cast<uint32_t>(bits & 0xffffffffu));
      PutU32(&buf, static_cast<uint32_t>(bits >> 32));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(buf.data(), buf.size())) {
    throw IoError("cannot write feature file: " + path);
  }
}

FeatureMatrix ReadFeatureMatrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path);
  unsigned char hdr[16];
  if (!in.read(reinterpret_cast<char*>(hdr), 16) || std::memcmp(hdr, "MFB1", 4) != 0) {
    throw IoError(path + ": bad feature header");
  }
  FeatureMatrix m;
  m.num_frames = ReadU32(hdr + 4);
  m.dim = ReadU32(hdr + 8);
  const uint32_t type = ReadU32(hdr + 12);
  if (type != 1 && type != 2) throw IoError(path + ": unknown dtype code");
  const size_t width = type == 1 ? 4 : 8;
  std::vector<unsigned char> raw(m.num_frames * m.dim * width);
  if (!in.read(reinterpret_cast<char*>(raw.data()), raw.size())) {
    throw IoError(path + ": truncated feature data");
  }
  m.data.resize(m.num_frames * m.dim);
  for (size_t i = 0; i < m.data.size(); ++i) {
    if (type == 1) {
      const uint32_t bits = ReadU32(&raw[4 * i]);
      float f;
      std::memcpy(&f, &bits, 4);
      m.data[i] = f;
    } else {
      const uint64_t bits = ReadU32(&raw[8 * i]) |
                            (static_cast<uint64_t>(ReadU32(&raw[8 * i + 4])) << 32);
      std::memcpy(&m.data[i], &bits, 8);
    }
  }
  return m;
}

std::vector<double> PoolMeanStd(const FeatureMatrix& m) {
  if (m.num_frames == 0) throw DomainError("pooling: no frames");
  std::vector<double> out(2 * m.dim, 0.0);
  for (size_t t = 0; t < m.num_frames; ++t) {
    for (size_t d = 0; d < m.dim; ++d) out[d] += m.at(t, d);
  }
  for (size_t d = 0; d < m.dim; ++d) out[d] /= static_cast<double>(m.num_frames);
  for (size_t t = 0; t < m.num_frames; ++t) {
    for (size_t d = 0; d < m.dim; ++d) {
      const double c = m.at(t, d) - out[d];
      out[m.dim + d] += c * c;
    }
  }
  for (size_t d = 0; d < m.dim; ++d) {
    out[m.dim + d] = std::sqrt(out[m.dim + d] / static_cast<double>(m.num_frames));
  }
  return out;
}

}  // namespace dsp
}  // namespace emoeval
