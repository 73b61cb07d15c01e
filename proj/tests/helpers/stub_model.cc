// tests/helpers/stub_model.cc

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

// Test classifier for the subprocess adapter. Prints "calm" when the RMS of
// the WAV at argv[last] is below the threshold and "agitated" otherwise.
//
//   stub_model [--threshold T] [--constant LABEL] file.wav

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>

#include "emoeval/dsp.h"

int main(int argc, char** argv) {
  double threshold = 0.1;
  std::string constant;
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--threshold" && i + 1 < argc) {
      threshold = std::atof(argv[++i]);
    } else if (arg == "--constant" && i + 1 < argc) {
      constant = argv[++i];
    } else {
      path = arg;
    }
  }
  if (path.empty()) {
    std::cerr << "usage: stub_model [--threshold T] [--constant LABEL] file.wav\n";
    return 2;
  }
  try {
    const auto w = emoeval::dsp::ReadWav(path);
    if (!constant.empty()) {
      std::cout << constant << "\n";
      return 0;
    }
    const double rms = std::sqrt(emoeval::dsp::SignalPower(w));
    std::cout << (rms < threshold ? "calm" : "agitated") << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
