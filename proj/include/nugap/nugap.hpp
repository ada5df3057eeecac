#pragma once

#include "nugap/error.hpp"
#include "nugap/poly.hpp"
#include "nugap/element.hpp"
#include "nugap/algebra.hpp"
#include "nugap/index.hpp"
#include "nugap/factorization.hpp"
#include "nugap/toeplitz.hpp"
#include "nugap/minimax.hpp"
#include "nugap/metrics.hpp"
#include "nugap/io.hpp"
