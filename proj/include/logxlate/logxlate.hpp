#pragma once

// Umbrella header: synthetic Apache-log generation with character-aligned
// annotations, rule-based annotation of real logs, character-level seq2seq
// translators, and edit-distance evaluation.

#include "logxlate/annotate.hpp"
#include "logxlate/corpus_io.hpp"
#include "logxlate/dataset.hpp"
#include "logxlate/error.hpp"
#include "logxlate/evaluate.hpp"
#include "logxlate/field_gen.hpp"
#include "logxlate/fields.hpp"
#include "logxlate/format.hpp"
#include "logxlate/metrics.hpp"
#include "logxlate/nn/adam.hpp"
#include "logxlate/nn/cells.hpp"
#include "logxlate/nn/checkpoint.hpp"
#include "logxlate/nn/config.hpp"
#include "logxlate/nn/model.hpp"
#include "logxlate/nn/tensor.hpp"
#include "logxlate/nn/train.hpp"
#include "logxlate/nn/translate.hpp"
#include "logxlate/record.hpp"
#include "logxlate/rng.hpp"
#include "logxlate/vocab.hpp"
