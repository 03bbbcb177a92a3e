from hgat_forecast.forecaster.heads import Forecaster, PredictionSet, TypeRouting
from hgat_forecast.forecaster.output import prediction_to_document, write_prediction
