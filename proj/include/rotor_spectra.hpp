#pragma once

#include "rotor_spectra/arnoldi.hpp"
#include "rotor_spectra/config.hpp"
#include "rotor_spectra/error.hpp"
#include "rotor_spectra/linalg.hpp"
#include "rotor_spectra/model.hpp"
#include "rotor_spectra/oracle.hpp"
#include "rotor_spectra/parallel.hpp"
#include "rotor_spectra/response.hpp"
#include "rotor_spectra/simulate.hpp"
#include "rotor_spectra/spectra.hpp"
#include "rotor_spectra/zero_noise.hpp"
