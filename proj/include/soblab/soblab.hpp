#pragma once

#include "soblab/asymptotic.hpp"
#include "soblab/beckner.hpp"
#include "soblab/errors.hpp"
#include "soblab/functionals.hpp"
#include "soblab/json_writer.hpp"
#include "soblab/measure.hpp"
#include "soblab/moments.hpp"
#include "soblab/numeric.hpp"
#include "soblab/perturbation.hpp"
#include "soblab/potential.hpp"
#include "soblab/random_inputs.hpp"
#include "soblab/spectral.hpp"
#include "soblab/tridiag.hpp"
