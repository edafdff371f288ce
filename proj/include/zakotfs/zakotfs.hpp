#pragma once

#include "core.hpp"
#include "dd.hpp"
#include "waveforms.hpp"
#include "pulse.hpp"
#include "rng.hpp"
#include "channel.hpp"
#include "td_oracle.hpp"
#include "receiver.hpp"
#include "harness.hpp"
