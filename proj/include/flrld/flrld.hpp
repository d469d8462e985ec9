#pragma once

#include "flrld/analysis.hpp"
#include "flrld/baselines.hpp"
#include "flrld/fedlearn.hpp"
#include "flrld/gzio.hpp"
#include "flrld/ledger.hpp"
#include "flrld/neuralnet.hpp"
#include "flrld/rng.hpp"
#include "flrld/sha256.hpp"
#include "flrld/topology.hpp"
#include "flrld/tripledata.hpp"
#include "flrld/wire.hpp"
