#ifndef FIRMFACTS_SRC_PANEL_INTERNAL_HPP
#define FIRMFACTS_SRC_PANEL_INTERNAL_HPP

#include "firmfacts/panel.hpp"

namespace firmfacts::detail {

/// Fills panel.prev for rows sorted by (firm, year).
void link_lags(Panel& panel);

}  // namespace firmfacts::detail

#endif  // FIRMFACTS_SRC_PANEL_INTERNAL_HPP
