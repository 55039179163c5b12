// rattle/wav.h

// Copyright 2026  Rattle Authors

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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rattle/audio.h"

namespace rattle {

// RIFF/WAVE, little-endian, 1-2 channels. Readable encodings: 16-bit PCM and
// 32-bit IEEE float. save_wav always writes 16-bit PCM.
//
// 16-bit decode maps code c to c/32768; encode maps amplitude a to
// clamp(round(32768*a), -32768, 32767), so a save/load round trip is within
// 1/32768 and a load/save round trip is byte-exact on the sample data.

AudioClip load_wav(const std::string& path);
void save_wav(const AudioClip& clip, const std::string& path);

// In-memory variants, used by the file functions and handy in tests.
AudioClip decode_wav(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

}  // namespace rattle
