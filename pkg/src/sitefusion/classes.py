"""Object class tags and the component combinations used for fusion."""

SITE = "site"
EMPTY_LP = "empty_lp"
COMBO_LP = "combo_lp"
MISSILE = "missile"
TEL = "tel"
TEL_GROUP = "tel_group"

COMPONENT_CLASSES = (EMPTY_LP, COMBO_LP, MISSILE, TEL, TEL_GROUP)
ALL_CLASSES = (SITE,) + COMPONENT_CLASSES

COMBOS = {
    "empty+3": (EMPTY_LP, MISSILE, TEL, TEL_GROUP),
    "combo+3": (COMBO_LP, MISSILE, TEL, TEL_GROUP),
    "all5": COMPONENT_CLASSES,
}
