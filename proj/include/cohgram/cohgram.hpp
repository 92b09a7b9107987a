#pragma once

#include "cohgram/config.hpp"
#include "cohgram/error.hpp"
#include "cohgram/eval.hpp"
#include "cohgram/features.hpp"
#include "cohgram/fft.hpp"
#include "cohgram/filter.hpp"
#include "cohgram/hilbert.hpp"
#include "cohgram/image.hpp"
#include "cohgram/manifest.hpp"
#include "cohgram/parallel.hpp"
#include "cohgram/pipeline.hpp"
#include "cohgram/png.hpp"
#include "cohgram/recording_io.hpp"
#include "cohgram/rng.hpp"
#include "cohgram/synth.hpp"
#include "cohgram/tensor_io.hpp"
#include "cohgram/types.hpp"
#include "cohgram/welch.hpp"
