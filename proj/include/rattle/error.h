// rattle/error.h

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

#include <stdexcept>
#include <string>

namespace rattle {

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define RATTLE_DEFINE_ERROR(Name)             \
  struct Name : Error {                       \
    using Error::Error;                       \
  }

// audio / wav
RATTLE_DEFINE_ERROR(MalformedWav);
RATTLE_DEFINE_ERROR(UnsupportedEncoding);
RATTLE_DEFINE_ERROR(IoFailure);
RATTLE_DEFINE_ERROR(SilentClip);
RATTLE_DEFINE_ERROR(RateMismatch);
RATTLE_DEFINE_ERROR(ChannelMismatch);

// mfcc
RATTLE_DEFINE_ERROR(InvalidConfig);
RATTLE_DEFINE_ERROR(NegativeFrequency);
RATTLE_DEFINE_ERROR(TooManyFilters);
RATTLE_DEFINE_ERROR(ClipTooShort);

// nn
RATTLE_DEFINE_ERROR(InvalidSpec);
RATTLE_DEFINE_ERROR(ShapeMismatch);
RATTLE_DEFINE_ERROR(EmptySequence);
RATTLE_DEFINE_ERROR(LossMismatch);
RATTLE_DEFINE_ERROR(EmptyDataset);
RATTLE_DEFINE_ERROR(VersionMismatch);
RATTLE_DEFINE_ERROR(CorruptCheckpoint);

// experiments
RATTLE_DEFINE_ERROR(TooFewSamples);
RATTLE_DEFINE_ERROR(NoNoiseClips);
RATTLE_DEFINE_ERROR(EmptySpace);

#undef RATTLE_DEFINE_ERROR

}  // namespace rattle
