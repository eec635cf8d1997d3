#pragma once

#include "qam/errors.hpp"
#include "qam/generator.hpp"
#include "qam/interval.hpp"
#include "qam/lattice.hpp"
#include "qam/mean.hpp"
#include "qam/order.hpp"
#include "qam/quadrature.hpp"
#include "qam/root.hpp"
#include "qam/smoothing.hpp"
#include "qam/spec_io.hpp"
