#pragma once

#include "decoysync/analysis.hpp"
#include "decoysync/channel.hpp"
#include "decoysync/config.hpp"
#include "decoysync/correlation.hpp"
#include "decoysync/error.hpp"
#include "decoysync/feasibility.hpp"
#include "decoysync/protocol.hpp"
#include "decoysync/results.hpp"
#include "decoysync/rng.hpp"
#include "decoysync/sweep.hpp"
