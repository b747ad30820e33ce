#pragma once

#include "divergelex/corpus.hpp"
#include "divergelex/corpus_io.hpp"
#include "divergelex/divergence.hpp"
#include "divergelex/embedding.hpp"
#include "divergelex/error.hpp"
#include "divergelex/pipeline.hpp"
#include "divergelex/preprocess.hpp"
#include "divergelex/random.hpp"
#include "divergelex/report.hpp"
#include "divergelex/space_io.hpp"
#include "divergelex/synth.hpp"
#include "divergelex/trainer.hpp"
