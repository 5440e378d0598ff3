#pragma once

#include "aura/auralizer.hpp"
#include "aura/backend.hpp"
#include "aura/bench.hpp"
#include "aura/convolver.hpp"
#include "aura/dft.hpp"
#include "aura/engine.hpp"
#include "aura/oracle.hpp"
#include "aura/process.hpp"
#include "aura/verify.hpp"
#include "aura/wav_io.hpp"
