#pragma once

#include "qss/attacks.hpp"
#include "qss/bits.hpp"
#include "qss/channel.hpp"
#include "qss/config.hpp"
#include "qss/css.hpp"
#include "qss/errors.hpp"
#include "qss/example.hpp"
#include "qss/experiment.hpp"
#include "qss/format.hpp"
#include "qss/gf2.hpp"
#include "qss/postprocess.hpp"
#include "qss/protocol.hpp"
#include "qss/qubit.hpp"
#include "qss/random.hpp"
#include "qss/run.hpp"
#include "qss/settings.hpp"
#include "qss/transcript_io.hpp"
