#pragma once

#include "aeval/annotations.hpp"
#include "aeval/core.hpp"
#include "aeval/errors.hpp"
#include "aeval/io.hpp"
#include "aeval/metrics.hpp"
#include "aeval/random.hpp"
#include "aeval/synthetic.hpp"
