from typing import Optional
import numpy as np
import pandas as pd
from matplotlib.figure import Figure
import logging

from ..analysis.latent_fusion import LatentFusion, sine_profile
from ..models.configs import TileLayout


class WeightProfilePlot:
    """Fusion weight profile: per-tile normalized weight curves over the long latent"""

    def __init__(self):
        self.logger = logging.getLogger('WeightProfilePlot')
        self.fusion = LatentFusion()

    def generate_figure(self,
                        layout: TileLayout,
                        weights: Optional[pd.DataFrame] = None,
                        title: Optional[str] = None) -> Figure:
        """
        Draw the weight profile

        Args:
            layout: Tile geometry
            weights: Output of LatentFusion.weight_frame, computed when None
            title: Optional title for the plot

        Returns:
            matplotlib Figure with the normalized weights (top) and the raw sine profile (bottom)
        """
        weights = self.fusion.weight_frame(layout) if weights is None else weights

        fig = Figure(figsize=(12, 6))
        ax_weights, ax_profile = fig.subplots(2, 1, gridspec_kw={'height_ratios': [2, 1]})

        for tile_index, rows in weights.groupby('tile'):
            ax_weights.plot(rows['frame'], rows['weight'], linewidth=1.0, label=f"tile {tile_index}")
        ax_weights.set_xlim(0, layout.long_length - 1)
        ax_weights.set_ylim(0, 1.05)
        ax_weights.set_xlabel('Latent frame')
        ax_weights.set_ylabel('Normalized weight')
        if layout.tile_count <= 10:
            ax_weights.legend(loc='upper right', fontsize='small')

        offsets = np.arange(layout.tile_length)
        ax_profile.bar(offsets, sine_profile(layout.tile_length), color='tab:blue')
        ax_profile.set_xlabel('Offset within tile')
        ax_profile.set_ylabel('omega')

        fig.suptitle(title or (
            f"Fusion weights n={layout.tile_length}, o={layout.overlap}, "
            f"L={layout.long_length} ({layout.tile_count} tiles)"
        ))
        fig.tight_layout()
        return fig

    def save_figure(self, figure: Figure, filepath: str, dpi: int = 150):
        """
        Save figure to file

        Args:
            figure: matplotlib Figure object
            filepath: Path to save the file
            dpi: Resolution for the output image
        """
        try:
            figure.savefig(filepath, dpi=dpi, bbox_inches='tight')
            self.logger.info(f"Weight profile saved to {filepath}")
        except Exception as e:
            self.logger.error(f"Failed to save weight profile: {str(e)}")
            raise
