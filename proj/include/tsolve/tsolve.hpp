#pragma once

#include "cta.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "f1.hpp"
#include "generators.hpp"
#include "hybrid.hpp"
#include "linalg.hpp"
#include "lpfeas.hpp"
#include "mmio.hpp"
#include "outcome.hpp"
#include "symmetric_eigen.hpp"
#include "ta.hpp"
#include "trace.hpp"
