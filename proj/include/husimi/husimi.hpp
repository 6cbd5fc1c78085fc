#pragma once

#include "core.hpp"
#include "fock.hpp"
#include "grid.hpp"
#include "symbols.hpp"
#include "continuation.hpp"
#include "star_product.hpp"
#include "dynamics.hpp"
#include "expectation.hpp"
#include "benchmarks.hpp"
#include "io.hpp"
