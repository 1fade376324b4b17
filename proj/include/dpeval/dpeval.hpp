#pragma once

#include "dpeval/classification.hpp"
#include "dpeval/core.hpp"
#include "dpeval/effort.hpp"
#include "dpeval/error.hpp"
#include "dpeval/evaluate.hpp"
#include "dpeval/io.hpp"
#include "dpeval/jit.hpp"
#include "dpeval/sastt.hpp"
#include "dpeval/stats.hpp"
