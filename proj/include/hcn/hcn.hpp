#pragma once

// Convenience header for the whole library.

#include "hcn/analytic.hpp"
#include "hcn/errors.hpp"
#include "hcn/io.hpp"
#include "hcn/mcsim.hpp"
#include "hcn/model.hpp"
#include "hcn/series.hpp"
#include "hcn/specfun.hpp"
