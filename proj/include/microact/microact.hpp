#pragma once

#include "microact/changepoint.hpp"
#include "microact/config.hpp"
#include "microact/dimreduce.hpp"
#include "microact/embedding.hpp"
#include "microact/forest.hpp"
#include "microact/ingest.hpp"
#include "microact/model_io.hpp"
#include "microact/pipeline.hpp"
#include "microact/rulsif.hpp"
#include "microact/schemas.hpp"
#include "microact/svm.hpp"
#include "microact/synth.hpp"
#include "microact/types.hpp"
#include "microact/zeroshot.hpp"
