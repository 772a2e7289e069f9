#pragma once

#include <spectv/eigenfactory.hpp>
#include <spectv/flows.hpp>
#include <spectv/grid.hpp>
#include <spectv/grid_io.hpp>
#include <spectv/l1_analysis.hpp>
#include <spectv/orthobasis.hpp>
#include <spectv/spectral.hpp>
#include <spectv/taut_string.hpp>
#include <spectv/tv.hpp>
