#ifndef SEMLINK_SEMLINK_HPP
#define SEMLINK_SEMLINK_HPP

#include "semlink/baseline_codec.hpp"
#include "semlink/canny.hpp"
#include "semlink/channel_model.hpp"
#include "semlink/config.hpp"
#include "semlink/corpus.hpp"
#include "semlink/dct.hpp"
#include "semlink/edge_tools.hpp"
#include "semlink/error.hpp"
#include "semlink/harness.hpp"
#include "semlink/image.hpp"
#include "semlink/intent_controller.hpp"
#include "semlink/json_io.hpp"
#include "semlink/metrics.hpp"
#include "semlink/phy_transport.hpp"
#include "semlink/random.hpp"
#include "semlink/scripted_oracle.hpp"
#include "semlink/semantic_codec.hpp"

#endif  // SEMLINK_SEMLINK_HPP
