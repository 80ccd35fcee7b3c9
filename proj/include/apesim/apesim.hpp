#pragma once

// Discrete-event model of the APEnet+ 3D-torus interconnect: link framing and
// flow control, NIC timing (dual-DMA host bus, TLB-accelerated receive path),
// RDMA transfers over host and GPU endpoints, and the LO|FA|MO mutual-watchdog
// fault-awareness protocol.

#include "calibration.hpp"
#include "channel.hpp"
#include "config.hpp"
#include "dma.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "framing.hpp"
#include "hostbus.hpp"
#include "link.hpp"
#include "lofamo.hpp"
#include "metrics.hpp"
#include "nic.hpp"
#include "platform.hpp"
#include "ratio.hpp"
#include "repro.hpp"
#include "rng.hpp"
#include "time.hpp"
#include "tlb.hpp"
#include "topology.hpp"
