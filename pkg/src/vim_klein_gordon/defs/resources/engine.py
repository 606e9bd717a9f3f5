import dagster as dg

from vim_klein_gordon.core.multiplier import AlphaTable, build_alpha_table


class VimEngineResource(dg.ConfigurableResource):
    """Shares one exact multiplier table across the assets of a run."""

    alpha_order: int = 121

    def setup_for_execution(self, context: dg.InitResourceContext) -> None:
        self._table = build_alpha_table(max(self.alpha_order, 2))
        context.log.info(f"Built alpha table of order {self._table.order}")

    def alpha_table(self, order: int) -> AlphaTable:
        """Table of at least `order`, rebuilt larger on demand."""
        if order > self._table.order:
            self._table = build_alpha_table(order)
        return self._table
