#pragma once

#include "stringmass/error.hpp"
#include "stringmass/numerics.hpp"
#include "stringmass/parallel.hpp"
#include "stringmass/model.hpp"
#include "stringmass/mufunc.hpp"
#include "stringmass/mufunc_io.hpp"
#include "stringmass/format.hpp"
#include "stringmass/spectrum.hpp"
#include "stringmass/dynamics.hpp"
#include "stringmass/fock.hpp"
